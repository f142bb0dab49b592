"""defectforge: point-cloud defect synthesis and anomaly detection."""

__version__ = "0.1.0"
