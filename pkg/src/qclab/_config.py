import os


def fft_workers():
    """Worker count for scipy.fft, taken from QCLAB_THREADS (default 1)."""
    try:
        n = int(os.environ.get("QCLAB_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)
