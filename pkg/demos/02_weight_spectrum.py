"""Per-delay weight spectra, the anytime distance certificate and the union bound.

For each delay d the enumerator counts codewords whose first nonzero block
lies d steps back.  A code is certified when the minimum weights grow
linearly in d and the counts stay under an exponential envelope.  The union
bound then turns the spectrum into a per-delay error estimate.
"""

from anytime_codes import ChannelModel, CodeParams, bhattacharyya, certify, enumerate_spectrum, sample_tz, union_bound_error

params = CodeParams(n=15, k=6, horizon=3)
# draw codes until one certifies; most draws do at these parameters
for seed in range(100):
    h = sample_tz(params, 0.5, seed)
    ws = enumerate_spectrum(h, d_max=3)
    cert = certify(ws, alpha=0.15, theta=1.2, d_o=1, h=h)
    print(f"seed {seed}: {'PASS' if cert.passed else 'FAIL'} {list(cert.violations)}")
    if cert.passed:
        break

for d in sorted(ws.counts):
    top = sorted(ws.counts[d].items())[:4]
    print(f"d={d}: w_min={ws.w_min(d)}, {ws.total(d)} codewords, lightest {top}")


zeta = bhattacharyya(ChannelModel.bec(0.3))
for d in sorted(ws.counts):
    print(f"union bound on first-error-at-delay-{d}: {union_bound_error(ws, zeta, d):.3e}")
