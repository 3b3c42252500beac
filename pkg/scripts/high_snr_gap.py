"""Envelope MI minus its high-SNR line ``0.5 log2(SNR/2) - CHI`` across SNR.

    python3 scripts/high_snr_gap.py [--rho 0.9]
"""

import argparse

import numpy as np

from skc import rss
from skc.channel import ChannelParams
from skc.specfun import CHI


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, default=0.9)
    ap.add_argument("--snrs", type=float, nargs="+", default=list(np.arange(0, 51, 10)))
    args = ap.parse_args()
    print(f"CHI = {CHI:.10f} bits")
    print(f"{'SNR dB':>7} {'exact':>10} {'line':>10} {'gap':>10}")
    for snr in args.snrs:
        pr = ChannelParams.from_snr_db(snr, rho=args.rho)
        exact = rss.mi2(pr, "AB", 1e-8).value
        line = rss.high_snr(pr).mi_ab_asym
        print(f"{snr:7.1f} {exact:10.6f} {line:10.6f} {exact - line:10.6f}")


if __name__ == "__main__":
    main()
