"""numpy forward pass for a small pre-norm decoder with deterministic weights.

Weights: tensor t (position in the canonical parameter order) element j
(row-major) = 0.1 * sin(0.37 * (j + 1) + 1.1 * (t + 1)); LayerNorm gains add
1.0. Writes logits and losses for a fixed sequence as %.17g text.
"""
import sys
import numpy as np

V, C, D, H, L, F = 11, 8, 8, 2, 2, 12
SEQ = [1, 5, 3, 7, 2, 9]
MASK = [0, 0, 1, 1, 0, 1]


def shapes():
    out = [("tok_emb", (V, D)), ("pos_emb", (C, D))]
    for l in range(L):
        p = f"layers.{l}."
        out += [(p + "ln1.gain", (1, D)), (p + "ln1.bias", (1, D)),
                (p + "attn.wq", (D, D)), (p + "attn.wk", (D, D)),
                (p + "attn.wv", (D, D)), (p + "attn.wo", (D, D)),
                (p + "ln2.gain", (1, D)), (p + "ln2.bias", (1, D)),
                (p + "ffn.w_up", (F, D)), (p + "ffn.b_up", (1, F)),
                (p + "ffn.w_down", (D, F)), (p + "ffn.b_down", (1, D))]
    out += [("ln_f.gain", (1, D)), ("ln_f.bias", (1, D)), ("lm_head", (V, D))]
    return out


def weights():
    w = {}
    for t, (name, shape) in enumerate(shapes()):
        j = np.arange(shape[0] * shape[1], dtype=np.float64)
        v = 0.1 * np.sin(0.37 * (j + 1) + 1.1 * (t + 1))
        if name.endswith(".gain"):
            v = v + 1.0
        w[name] = v.reshape(shape)
    return w


def ln(x, g, b):
    mu = x.mean(axis=1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=1, keepdims=True)
    return (x - mu) / np.sqrt(var + 1e-5) * g + b


def gelu(u):
    return 0.5 * u * (1 + np.tanh(np.sqrt(2 / np.pi) * (u + 0.044715 * u ** 3)))


def forward(w, ids):
    n = len(ids)
    x = w["tok_emb"][ids] + w["pos_emb"][:n]
    hd = D // H
    causal = np.tril(np.ones((n, n), dtype=bool))
    for l in range(L):
        p = f"layers.{l}."
        h = ln(x, w[p + "ln1.gain"], w[p + "ln1.bias"])
        q, k, v = (h @ w[p + "attn." + m].T for m in ("wq", "wk", "wv"))
        o = np.zeros_like(q)
        for head in range(H):
            s = slice(head * hd, (head + 1) * hd)
            sc = q[:, s] @ k[:, s].T / np.sqrt(hd)
            sc = np.where(causal, sc, -np.inf)
            sc = np.exp(sc - sc.max(axis=1, keepdims=True))
            sc /= sc.sum(axis=1, keepdims=True)
            o[:, s] = sc @ v[:, s]
        x = x + o @ w[p + "attn.wo"].T
        h = ln(x, w[p + "ln2.gain"], w[p + "ln2.bias"])
        x = x + gelu(h @ w[p + "ffn.w_up"].T + w[p + "ffn.b_up"]) @ w[p + "ffn.w_down"].T \
            + w[p + "ffn.b_down"]
    x = ln(x, w["ln_f.gain"], w["ln_f.bias"])
    return x @ w["lm_head"].T


def nll(logits, ids, mask):
    m = logits.max(axis=1, keepdims=True)
    logp = logits - m - np.log(np.exp(logits - m).sum(axis=1, keepdims=True))
    terms = [-logp[i - 1, ids[i]] for i in range(1, len(ids)) if mask[i]]
    return sum(terms) / len(terms)


if __name__ == "__main__":
    w = weights()
    logits = forward(w, SEQ)
    out = sys.stdout
    out.write(f"shape {logits.shape[0]} {logits.shape[1]}\n")
    for row in logits:
        out.write(" ".join(f"{v:.17g}" for v in row) + "\n")
    out.write(f"loss_full {nll(logits, SEQ, [1] * len(SEQ)):.17g}\n")
    out.write(f"loss_masked {nll(logits, SEQ, MASK):.17g}\n")
