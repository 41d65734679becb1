"""Independent reference implementations used as test oracles.

Everything here is written with explicit Python loops over scalars so that
it shares no code path with the vectorised package implementation.
"""

import math


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def matvec(W, v):
    return [sum(W[i][j] * v[j] for j in range(len(v))) for i in range(len(W))]


def gru(W_z, W_r, W_h, b_z, b_r, b_h, h_prev, x):
    """h' = (1-z)*h + z*tanh(W_h [r*h, x] + b_h) with z, r from [h, x]."""
    hx = list(h_prev) + list(x)
    z = [sigmoid(a + b) for a, b in zip(matvec(W_z, hx), b_z)]
    r = [sigmoid(a + b) for a, b in zip(matvec(W_r, hx), b_r)]
    rhx = [ri * hi for ri, hi in zip(r, h_prev)] + list(x)
    ht = [math.tanh(a + b) for a, b in zip(matvec(W_h, rhx), b_h)]
    return [(1 - zi) * hi + zi * ti for zi, hi, ti in zip(z, h_prev, ht)]


def _layer(t, prefix):
    return [t[f"{prefix}.{n}"].tolist() for n in ("W_z", "W_r", "W_h", "b_z", "b_r", "b_h")]


def example_nll(t, layers, mode, src, tgt):
    """Summed negative log-likelihood and token count for one unpadded pair.

    ``t`` maps tensor names to arrays; ``src`` has no padding, ``tgt`` is
    GO + comment + EOS without padding.
    """
    H = t["enc0.b_z"].shape[0]
    xs = [t["E_src"][i].tolist() for i in src]
    finals = []
    for layer in range(layers):
        p = _layer(t, f"enc{layer}")
        h = [0.0] * H
        outs = []
        for x in xs:
            h = gru(*p, h, x)
            outs.append(h)
        xs = outs
        finals.append(h)
    states = xs
    weights = [t["F"][i].tolist() for i in src]
    if mode == "mul":
        terms = [[w * e for w, e in zip(wv, ev)] for wv, ev in zip(weights, states)]
    elif mode == "add":
        terms = [[w + e for w, e in zip(wv, ev)] for wv, ev in zip(weights, states)]
    else:
        terms = states

    W_d, W_e, v = t["W_d"].tolist(), t["W_e"].tolist(), t["v"].tolist()
    W_o, b_o = t["W_o"].tolist(), t["b_o"].tolist()
    dec = [_layer(t, f"dec{layer}") for layer in range(layers)]
    state = list(finals)
    nll = 0.0
    for y_prev, gold in zip(tgt[:-1], tgt[1:]):
        q = matvec(W_d, state[-1])
        scores = []
        for e in states:
            k = matvec(W_e, e)
            scores.append(sum(vi * math.tanh(qi + ki) for vi, qi, ki in zip(v, q, k)))
        m = max(scores)
        ex = [math.exp(s - m) for s in scores]
        alpha = [e / sum(ex) for e in ex]
        c = [sum(alpha[i] * terms[i][j] for i in range(len(terms))) for j in range(H)]
        x = t["E_tgt"][y_prev].tolist()
        new = []
        for layer in range(layers):
            if layer == layers - 1:
                x = x + c
            x = gru(*dec[layer], state[layer], x)
            new.append(x)
        state = new
        logits = [a + b for a, b in zip(matvec(W_o, state[-1]), b_o)]
        m = max(logits)
        log_z = m + math.log(sum(math.exp(z - m) for z in logits))
        nll -= logits[gold] - log_z
    return nll, len(tgt) - 1


def batch_loss(params, src_rows, tgt_rows, mode):
    """Masked mean cross-entropy over a padded batch, pair by pair."""
    total = count = 0
    for src, tgt in zip(src_rows, tgt_rows):
        s = [int(i) for i in src if i != 0]
        g = [int(i) for i in tgt if i != 0]
        nll, n = example_nll(params.tensors, params.config.layers, mode, s, g)
        total += nll
        count += n
    return total / count
