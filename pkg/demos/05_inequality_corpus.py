"""Running the randomized inequality-verification corpus.

Three suites: the correlation lemma on random sparse pairs, the partition
invariants on random draws, and the two residual propositions replayed
along real pursuit traces with exact RICs. Violation counts should be
zero; worst slacks show how much numerical headroom the inequalities
keep. (The acceptance suite runs the full-size corpus; this demo uses a
small one so it finishes in about a second.)
"""

import json

from gomp import check_lemma1, run_verification_corpus
import numpy as np

# A single lemma check, spelled out.
u = np.array([0.0, 3.0, -1.0, 0.0, 0.5])
z = np.array([1.0, 2.0, 0.0, 0.0, -2.0])
chk = check_lemma1(u, z, S=2)
print(f"<u, z> = {chk.lhs:.3f} <= {chk.rhs:.3f} "
      f"(overlap {chk.overlap}, holds = {chk.holds})\n")

report = run_verification_corpus(
    lemma_pairs=1000,
    partition_draws=1000,
    pursuit_instances=60,
    seed=11,
)
print(json.dumps(report, indent=2, default=float))
assert report["total_violations"] == 0
