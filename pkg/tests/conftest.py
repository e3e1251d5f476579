import os

# Pin BLAS pools before numpy loads anywhere: the benchmark criteria are
# claimed single-threaded, and tiny matmuls gain nothing from threads.
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")
