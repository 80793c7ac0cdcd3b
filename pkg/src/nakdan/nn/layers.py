"""Layer implementations with explicit forward caches and backward passes."""

from __future__ import annotations

import numpy as np

from .params import NNError, ParamBank


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def log_softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - np.max(x, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def softmax(x: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(x))


def softmax_cross_entropy(logits: np.ndarray, target: int) -> tuple[float, np.ndarray]:
    """Loss -log p(target) and its gradient with respect to the logits."""
    logp = log_softmax(logits)
    grad = np.exp(logp)
    grad[target] -= 1.0
    return float(-logp[target]), grad


class Embedding:
    """Trainable lookup table; row 0 is conventionally the unknown symbol."""

    def __init__(self, bank: ParamBank, name: str, vocab: int, dim: int, rng: np.random.Generator):
        self.bank = bank
        self.name = name
        self.vocab = vocab
        self.dim = dim
        bank.add(name, (vocab, dim), rng)
        self._indices: list[np.ndarray] = []

    def forward(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.intp)
        if idx.size and (idx.min() < 0 or idx.max() >= self.vocab):
            raise NNError(f"{self.name}: index outside vocabulary of {self.vocab}")
        self._indices.append(idx)
        return self.bank[self.name][idx]

    def reset(self) -> None:
        self._indices.clear()

    def backward(self, d_out: np.ndarray) -> None:
        idx = self._indices.pop()
        np.add.at(self.bank.grad(self.name), idx, d_out)


class MLP:
    """Feed-forward net, tanh on hidden layers, linear output layer."""

    def __init__(self, bank: ParamBank, name: str, widths: list[int], rng: np.random.Generator):
        if len(widths) < 2:
            raise NNError("an MLP needs at least input and output widths")
        self.bank = bank
        self.name = name
        self.widths = list(widths)
        for i in range(len(widths) - 1):
            bank.add(f"{name}.W{i}", (widths[i + 1], widths[i]), rng)
            bank.add(f"{name}.b{i}", (widths[i + 1],))
        self._cache: list[list[np.ndarray]] = []

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.widths[0]:
            raise NNError(f"{self.name}: input dim {x.shape[-1]}, expected {self.widths[0]}")
        activations = [x]
        h = x
        last = len(self.widths) - 2
        for i in range(last + 1):
            W = self.bank[f"{self.name}.W{i}"]
            b = self.bank[f"{self.name}.b{i}"]
            z = h @ W.T + b
            h = z if i == last else np.tanh(z)
            activations.append(h)
        self._cache.append(activations)
        return h

    def infer(self, x: np.ndarray) -> np.ndarray:
        """Forward without keeping a cache; for scoring-only paths."""
        out = self.forward(x)
        self._cache.pop()
        return out

    def reset(self) -> None:
        self._cache.clear()

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        activations = self._cache.pop()
        d = np.asarray(d_out, dtype=np.float64)
        last = len(self.widths) - 2
        for i in range(last, -1, -1):
            h_out = activations[i + 1]
            if i != last:
                d = d * (1.0 - h_out * h_out)
            h_in = activations[i]
            gW = self.bank.grad(f"{self.name}.W{i}")
            gb = self.bank.grad(f"{self.name}.b{i}")
            if d.ndim == 1:
                gW += np.outer(d, h_in)
                gb += d
            else:
                gW += d.T @ h_in
                gb += d.sum(axis=0)
            d = d @ self.bank[f"{self.name}.W{i}"]
        return d


class LSTM:
    """Unidirectional LSTM over a sequence, zero initial state."""

    def __init__(self, bank: ParamBank, name: str, input_dim: int, hidden_dim: int, rng: np.random.Generator):
        self.bank = bank
        self.name = name
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        bank.add(f"{name}.W", (4 * hidden_dim, input_dim + hidden_dim), rng)
        bank.add(f"{name}.b", (4 * hidden_dim,))
        self._cache: list[dict] = []

    def forward(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2:
            raise NNError(f"{self.name}: expected a (steps, dim) sequence")
        H = self.hidden_dim
        W = self.bank[f"{self.name}.W"]
        b = self.bank[f"{self.name}.b"]
        h = np.zeros(H)
        c = np.zeros(H)
        steps = []
        outs = np.empty((len(xs), H))
        for t, x in enumerate(xs):
            if x.shape[0] != self.input_dim:
                raise NNError(
                    f"{self.name}: input at position {t} has dim {x.shape[0]},"
                    f" expected {self.input_dim}"
                )
            xh = np.concatenate([x, h])
            z = W @ xh + b
            i = sigmoid(z[0:H])
            f = sigmoid(z[H : 2 * H])
            g = np.tanh(z[2 * H : 3 * H])
            o = sigmoid(z[3 * H : 4 * H])
            c_prev = c
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h = o * tc
            steps.append({"xh": xh, "i": i, "f": f, "g": g, "o": o, "c": c, "c_prev": c_prev, "tc": tc})
            outs[t] = h
        self._cache.append(steps)
        return outs

    def reset(self) -> None:
        self._cache.clear()

    def backward(self, d_outs: np.ndarray) -> np.ndarray:
        steps = self._cache.pop()
        H = self.hidden_dim
        W = self.bank[f"{self.name}.W"]
        gW = self.bank.grad(f"{self.name}.W")
        gb = self.bank.grad(f"{self.name}.b")
        d_xs = np.zeros((len(steps), self.input_dim))
        dh = np.zeros(H)
        dc = np.zeros(H)
        for t in range(len(steps) - 1, -1, -1):
            s = steps[t]
            dh = dh + d_outs[t]
            do = dh * s["tc"]
            dc = dc + dh * s["o"] * (1.0 - s["tc"] ** 2)
            di = dc * s["g"]
            df = dc * s["c_prev"]
            dg = dc * s["i"]
            dc = dc * s["f"]
            dz = np.concatenate(
                [
                    di * s["i"] * (1.0 - s["i"]),
                    df * s["f"] * (1.0 - s["f"]),
                    dg * (1.0 - s["g"] ** 2),
                    do * s["o"] * (1.0 - s["o"]),
                ]
            )
            gW += np.outer(dz, s["xh"])
            gb += dz
            dxh = W.T @ dz
            d_xs[t] = dxh[: self.input_dim]
            dh = dxh[self.input_dim :]
        return d_xs


class BiLSTMStack:
    """Stacked bidirectional LSTM; each position yields 2*hidden_dim state."""

    def __init__(
        self,
        bank: ParamBank,
        name: str,
        input_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
        layers: int = 2,
    ):
        if layers < 1:
            raise NNError("at least one layer required")
        self.name = name
        self.layers = []
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        dim = input_dim
        for layer in range(layers):
            fwd = LSTM(bank, f"{name}.l{layer}f", dim, hidden_dim, rng)
            bwd = LSTM(bank, f"{name}.l{layer}b", dim, hidden_dim, rng)
            self.layers.append((fwd, bwd))
            dim = 2 * hidden_dim
        self.output_dim = dim

    def reset(self) -> None:
        for fwd, bwd in self.layers:
            fwd.reset()
            bwd.reset()

    def forward(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if len(xs) == 0:
            raise NNError(f"{self.name}: empty sequence")
        h = xs
        for fwd, bwd in self.layers:
            left = fwd.forward(h)
            right = bwd.forward(h[::-1])[::-1]
            h = np.concatenate([left, right], axis=1)
        return h

    def backward(self, d_outs: np.ndarray) -> np.ndarray:
        d = np.asarray(d_outs, dtype=np.float64)
        H = self.hidden_dim
        for fwd, bwd in reversed(self.layers):
            d_left = fwd.backward(d[:, :H])
            d_right = bwd.backward(d[::-1, H:])[::-1]
            d = d_left + d_right
        return d
