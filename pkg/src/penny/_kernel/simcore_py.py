"""Pure-Python event-merge kernel.

The reference implementation of the hot loop, kept in lockstep with
the compiled twin: same merge order, same tie-break hash, same step
dispatch. It runs on unbounded Python integers, so callers fall back
to it whenever scaled times or amounts could overflow 64 bits.

Event k of stream i fires at time offset[i] + period[i] * k; the
offset lets arrival streams start at the beginning of the month while
tick streams fire at the end of each period.

Step encoding (five parallel arrays, cascades flattened):
  op 0 METER  arg=node index      meters[arg] += base * num // den
  op 1 PUSH   arg=diamond index   backlog[arg] += base * num // den
  op 2 DRAIN  arg=diamond index   take m = min(backlog, base*num//den),
              sub=cascade index   then run cascade `sub` with base m
The caller guarantees every division here is exact.
"""

from __future__ import annotations

MASK = (1 << 64) - 1


def tie_hash(seed: int, stream: int, event: int) -> int:
    """splitmix64 over a stream/event pair; identical in both kernels."""
    x = (seed ^ (stream * 0x9E3779B97F4A7C15) ^ (event * 0xBF58476D1CE4E5B9)) & MASK
    x = (x + 0x9E3779B97F4A7C15) & MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return (z ^ (z >> 31)) & MASK


def run_merge(
    n_nodes: int,
    n_diamonds: int,
    period: list[int],
    offset: list[int],
    count: list[int],
    priority: list[int],
    cascade_idx: list[int],
    base: int,
    casc_start: list[int],
    casc_len: list[int],
    op: list[int],
    arg: list[int],
    num: list[int],
    den: list[int],
    sub: list[int],
    seed: int,
) -> list[int]:
    meters = [0] * n_nodes
    backlog = [0] * n_diamonds

    def run_cascade(ci: int, amount: int) -> None:
        start = casc_start[ci]
        for k in range(start, start + casc_len[ci]):
            amt = amount * num[k] // den[k]
            code = op[k]
            if code == 0:
                meters[arg[k]] += amt
            elif code == 1:
                backlog[arg[k]] += amt
            else:
                q = arg[k]
                m = backlog[q] if backlog[q] < amt else amt
                if m > 0:
                    backlog[q] -= m
                    run_cascade(sub[k], m)

    n_streams = len(period)
    next_event = [0] * n_streams
    next_time = [offset[i] for i in range(n_streams)]
    next_tie = [tie_hash(seed, i, 0) for i in range(n_streams)]
    remaining = sum(count)

    while remaining > 0:
        best = -1
        for i in range(n_streams):
            if next_event[i] >= count[i]:
                continue
            if best < 0:
                best = i
                continue
            if next_time[i] < next_time[best]:
                best = i
            elif next_time[i] == next_time[best]:
                if priority[i] < priority[best]:
                    best = i
                elif priority[i] == priority[best]:
                    if next_tie[i] < next_tie[best] or (
                        next_tie[i] == next_tie[best] and i < best
                    ):
                        best = i
        run_cascade(cascade_idx[best], base)
        next_event[best] += 1
        remaining -= 1
        if next_event[best] < count[best]:
            next_time[best] = offset[best] + period[best] * next_event[best]
            next_tie[best] = tie_hash(seed, best, next_event[best])

    return meters
