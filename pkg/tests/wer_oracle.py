"""Brute-force word-error oracle: enumerate every monotone alignment."""


def oracle_edit_distance(ref, hyp):
    """Minimal edits over all alignments, by plain exponential recursion."""
    if not ref:
        return len(hyp)
    if not hyp:
        return len(ref)
    best = oracle_edit_distance(ref[1:], hyp[1:]) + (0 if ref[0] == hyp[0] else 1)
    best = min(best, oracle_edit_distance(ref[1:], hyp) + 1)
    return min(best, oracle_edit_distance(ref, hyp[1:]) + 1)


def all_sequences(alphabet, max_len, include_empty):
    out = [()] if include_empty else []
    frontier = [()]
    for _ in range(max_len):
        frontier = [seq + (tok,) for seq in frontier for tok in alphabet]
        out.extend(frontier)
    return out
