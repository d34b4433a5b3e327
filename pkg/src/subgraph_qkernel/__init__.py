"""All-subgraph graph kernels: exact spectra, BH/SH kernels, circuit checks and SVM harness."""

__version__ = "0.1.0"
