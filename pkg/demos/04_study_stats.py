"""
Preference votes
================

Three methods, 401 votes. Is the split uneven, and does the winner beat
each rival on its own?
"""

# %%
from wcagfix.stats import VoteCounts, study_summary

votes = VoteCounts.from_mapping({"ours": 248, "gpt": 54, "base": 99})
print(study_summary(votes))

# %%
# The p-values come from a hand-written incomplete gamma function. With two
# degrees of freedom the tail has a closed form to compare against.
import math

from wcagfix.stats import chi2_sf

for x in (0.5, 2.0, 10.0):
    print(x, chi2_sf(x, 2), math.exp(-x / 2))

# %%
# Pairwise tests are one-tailed: the p-value is small only when the first
# method got more votes.
from wcagfix.stats import chi2_pairwise

print(chi2_pairwise(248, 99))
print(chi2_pairwise(99, 248))
