"""Step-by-step reference for guided greedy decoding, written without numpy."""


def random_table(rng, tokens, eos="</s>", start="<s>", low=-3.0, high=3.0):
    rows = {}
    from wcagfix.guidance import Condition

    for prev in [start] + [t for t in tokens if t != eos]:
        for cond in Condition:
            rows[(prev, cond)] = {t: round(rng.uniform(low, high), 6) for t in tokens}
    return rows


def simulate(table, vocab, prompt, gamma, max_tokens, eos="</s>", start="<s>"):
    from wcagfix.guidance import Condition

    prefixes = {p for p, _ in table}
    last = prompt[-1] if prompt[-1] in prefixes else start
    out = []
    while len(out) < max_tokens:
        pos = table[(last, Condition.ZERO_VIOLATIONS)]
        neg = table[(last, Condition.NONZERO_VIOLATIONS)]
        best, best_score = None, None
        for tok in vocab:
            score = neg[tok] + gamma * (pos[tok] - neg[tok])
            if best_score is None or score > best_score + 1e-12:
                best, best_score = tok, score
        if best == eos:
            break
        out.append(best)
        last = best
    return out
