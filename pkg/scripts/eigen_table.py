"""Print lambda1, lambda2 for n_a, n_b <= N of one kind and parity, with the Pruefer check.

    python3 scripts/eigen_table.py --kind II --parity 0110 --N 3
"""

import argparse
import itertools

from cyclidic.eigensolver import get_eigen, verify_pruefer


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", default="I")
    ap.add_argument("--parity", default="000")
    ap.add_argument("--N", type=int, default=3)
    args = ap.parse_args()
    print(f"{'n':>8} {'lambda1':>22} {'lambda2':>22} {'zeros':>8} {'residual':>10}")
    for n in itertools.product(range(args.N + 1), repeat=2):
        e = get_eigen(args.kind, n, args.parity)
        check = verify_pruefer(e)
        zeros = ",".join(map(str, check["zero_counts"]))
        print(f"{str(n):>8} {e.lambda1:22.15g} {e.lambda2:22.15g} {zeros:>8} {max(check['residuals']):10.1e}")


if __name__ == "__main__":
    main()
