# SYNTHETIC rate table -- NOT measured from any trained codec.
#
# Illustrative generalized-logistic parameters (a, c, d, e) per downsampling
# depth K, hand-picked so the curves look like typical SSIM-vs-SNR S-curves:
# deeper models (fewer latent symbols) saturate earlier and at a lower
# ceiling a + d/c. Replace with `semcoex fit` output from real measurements.

DEFAULT_RATE_TABLE = {
    2: (0.25, 1.5, 1.095, 0.90),  # ceiling 0.980
    3: (0.25, 2.0, 1.360, 0.85),  # ceiling 0.930
    4: (0.22, 2.5, 1.550, 0.80),  # ceiling 0.840
    5: (0.20, 3.0, 1.560, 0.75),  # ceiling 0.720
    6: (0.18, 3.5, 1.470, 0.70),  # ceiling 0.600
}
