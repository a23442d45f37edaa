"""
Expected GLEU under increasing corruption
=========================================

Hypotheses are corrupted copies of their reference. As the corruption
rate grows, expected and max GLEU fall and the spread between them
widens.
"""

from shiftkit import SynthSpec, gen_translation
from shiftkit.evaluate import evaluate_translation
from shiftkit.translation import egleu, max_gleu, sentence_gleu

print(sentence_gleu("the cat sat down".split(), "the cat sat down".split()))
print(sentence_gleu("the cat sat".split(), "the cat sat down".split()))

for severity in (0.0, 0.5, 1.0, 2.0, 4.0):
    recs = gen_translation(SynthSpec(seed=0, n_in=200, n_shifted=200, shift_severity=severity, task="translation"))
    print(f"severity {severity:3.1f}: eGLEU {egleu(recs):6.2f}  maxGLEU {max_gleu(recs):6.2f}")

###############################################################################
# The retention suite uses 100 - eGLEU per sentence as the error.

recs = gen_translation(SynthSpec(seed=0, n_in=500, n_shifted=500, shift_severity=1.0, task="translation"))
report = evaluate_translation(recs, threshold=30.0)
for name in ("egleu", "max_gleu", "egleu_error", "r_auc", "f1_auc", "f1_at_95"):
    print(name, {k: None if v is None else round(v, 3) for k, v in report.metrics[name].items()})
print("ROC-AUC", round(report.metrics["roc_auc"]["full"], 3))
