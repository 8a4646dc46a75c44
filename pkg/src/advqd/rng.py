"""Deterministic seed derivation.

Every random draw in the engine flows from one 64-bit master seed through
`derive_seed(master, context)`, where the context is a short tuple of
integers naming the consumer (a stream tag plus indices such as generation,
iteration, or matchup coordinates). The mixer is splitmix64 applied as a
sequential hash, so distinct contexts give independent-looking seeds and a
run can be replayed bit-exactly from its config file alone.

Context layouts used across the engine (first element is the stream tag):

==================  =====================================================
(INITIAL_TASKS,)        initial random opposing task set
(SEARCH_LOOP, g)        per-generation stream: task picks, parents, noise
(SEARCH_DUEL, g, i)     duel seed for loop evaluation i of generation g
(SELECTION, g)          clustering / niching stream for generation g
(SELECTION_DUEL, g, e, t)   task-selection tournament duel: elite e vs task t
(REPLICATION, v, r)     per-run master seed in a plan: variant v, rep r
(ROUND_ROBIN, i, j, k)  inter-variant tournament duel: row i, col j, rep k
(ELO,)                  match shuffling for the rating computation
(COVERAGE, side)        clustering of ranking vectors for the coverage measure
==================  =====================================================
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

# Stream tags (keep stable: they are part of the replay contract).
INITIAL_TASKS = 1
SEARCH_LOOP = 2
SEARCH_DUEL = 3
SELECTION = 4
SELECTION_DUEL = 5
REPLICATION = 6
ROUND_ROBIN = 7
ELO = 8
COVERAGE = 9


def splitmix64(x: int) -> int:
    """One splitmix64 step: advance by the golden gamma and finalize."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master_seed: int, context: tuple[int, ...]) -> int:
    """Derive a 64-bit seed from a master seed and an integer context tuple.

    Sequential splitmix64 hash: order-sensitive, so (1, 2) and (2, 1)
    land on unrelated seeds.
    """
    h = splitmix64(master_seed & _MASK64)
    for c in context:
        h = splitmix64(h ^ splitmix64(c & _MASK64))
    return h
