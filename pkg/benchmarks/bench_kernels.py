"""Compare the compiled SGD kernel with the pure-Python fallback.

    python benchmarks/bench_kernels.py --samples 1000 --epochs 3

Both backends run the same epochs from the same initial network; the script
reports time per SGD step, the speed-up, and whether the resulting
parameters are bit-identical.
"""

import argparse
import time

import numpy as np

from stockcast import backend, mlp
from stockcast.mlp import Topology


def bench(kind, net, X, Y, rate, epochs, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        trained, history = mlp.train_epochs(net, X, Y, rate, epochs, kernel=kind)
        best = min(best, time.perf_counter() - t0)
    return best, trained, history


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--topology", default="5:21:21:1")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--rate", type=float, default=0.1)
    p.add_argument("--repeat", type=int, default=3, help="best-of timing repeats")
    p.add_argument("--python-epochs", type=int, default=1, help="epochs for the slow fallback")
    args = p.parse_args()

    topo = Topology.parse(args.topology)
    rng = np.random.default_rng(0)
    X = rng.uniform(0.1, 0.9, (args.samples, topo.n_inputs))
    Y = rng.uniform(0.1, 0.9, (args.samples, topo.n_outputs))
    net = mlp.init_network(topo, 1)

    print(f"topology {topo}, {args.samples} samples, backends available: {backend.available()}")
    rows = {}
    for kind in backend.available():
        epochs = args.python_epochs if kind == "python" else args.epochs
        elapsed, trained, history = bench(kind, net, X, Y, args.rate, epochs, 1 if kind == "python" else args.repeat)
        per_step = elapsed / (epochs * args.samples)
        rows[kind] = per_step
        print(f"{kind:>9}: {per_step * 1e6:9.2f} us/step  ({epochs} epochs in {elapsed:.3f}s, final mse {history[-1]:.6g})")

    if len(rows) == 2:
        print(f"speed-up: {rows['python'] / rows['compiled']:.0f}x")
        a, _ = mlp.train_epochs(net, X, Y, args.rate, args.python_epochs, kernel="compiled")
        b, _ = mlp.train_epochs(net, X, Y, args.rate, args.python_epochs, kernel="python")
        print(f"bit-identical after {args.python_epochs} epoch(s): {a.equals(b)}")
        steps = 7 * 5 * 5000 * 1040
        print(f"projected 7 stocks x 5 runs x 5000 epochs x 1040 samples: "
              f"compiled {steps * rows['compiled'] / 60:.1f} min, python {steps * rows['python'] / 3600:.1f} h")


if __name__ == "__main__":
    main()
