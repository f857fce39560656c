"""
Negative guidance on a toy model
================================

The bundled toy model is a bigram table with two rows per token: one for
the prompt that asks for zero violations and one for the prompt that admits
some. Guidance pushes decoding away from the second.
"""

# %%
import numpy as np

from wcagfix import guided_distribution, guided_logits

pos = np.array([2.0, 2.1])   # next-token logits, "zero violations" prompt
neg = np.array([0.0, 3.0])   # same step, "non-zero violations" prompt
for gamma in (0.0, 1.0, 1.05, 1.1, 2.0):
    z = guided_logits(pos, neg, gamma)
    print(f"gamma={gamma:<5} logits={np.round(z, 3)} probs={np.round(guided_distribution(z), 3)}")

# %%
# At gamma=1 guidance is off and the first token still wins by 0.1. Past 1
# the gap to the unwanted prompt gets amplified and the order flips.

# %%
# The same effect inside a full decode. The toy model puts an alt attribute
# on the image only when guided.
from wcagfix.cli import run_decode_demo

for gamma in (0.0, 1.0, 1.1):
    raw, html = run_decode_demo(gamma=gamma)
    print(f"gamma={gamma}: {html}")

raw, _ = run_decode_demo(gamma=0.0)
print("unguided chatter survives outside the html:", repr(raw[raw.rindex(">") + 1:]))

# %%
# The prompt the model sees.
from wcagfix import Condition, assemble_prompt

print(assemble_prompt('<html><body><img src="red-car.png"></body></html>',
                      Condition.ZERO_VIOLATIONS))
