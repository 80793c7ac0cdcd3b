"""Candidate filtering and diacritic-sequence ranking.

Known words are scored against their (possibly tagger-filtered) lexicon
candidates; unknown words get a constrained beam search over the diacritic
label alphabet. Scores are chain-rule log-probabilities: at each letter an
MLP reads the letter encoding h'(c_j) joined with an LSTM encoding of the
labels chosen so far, and the per-letter log-softmax terms add up.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hebrew import (
    ALEF,
    MATER_LETTERS,
    VAV,
    DiacriticMark,
    DiacritizedLetter,
    DiacritizedWord,
    ShinDotSide,
    Vowel,
    is_hebrew_letter,
)
from .lexicon import Candidate, CandidateSet
from .nn import (
    MLP,
    BiLSTMStack,
    Embedding,
    NNError,
    ParamBank,
    log_softmax,
    sigmoid,
    softmax_cross_entropy,
)
from .tagger import _CHARS, _CHAR_SEP, _CHAR_UNK, CHAR_VOCAB


# ---------------------------------------------------------------------------
# Label alphabet
# ---------------------------------------------------------------------------

MATER_LABEL = "mater"
BOS = "<s>"


def _build_labels() -> tuple[str, ...]:
    labels = ["none", "none+g"]
    for vowel in Vowel:
        if vowel is Vowel.SHURUK:
            labels.append("shuruk")  # the dot is the vowel; no gemination slot
        else:
            labels.append(vowel.name.lower())
            labels.append(vowel.name.lower() + "+g")
    labels.append(MATER_LABEL)
    return tuple(labels)


LABELS = _build_labels()
LABEL_INDEX = {label: i for i, label in enumerate(LABELS)}
_VOWEL_BY_NAME = {v.name.lower(): v for v in Vowel}


def label_of_letter(letter: DiacritizedLetter) -> str:
    if letter.mater_deleted:
        return MATER_LABEL
    mark = letter.mark
    if mark.vowel is Vowel.SHURUK:
        return "shuruk"
    name = mark.vowel.name.lower() if mark.vowel else "none"
    return name + "+g" if mark.gemination else name


def letter_from_label(base: str, label: str, shin_dot: ShinDotSide = ShinDotSide.NONE) -> DiacritizedLetter:
    if label == MATER_LABEL:
        return DiacritizedLetter(base, mater_deleted=True)
    if label == "shuruk":
        return DiacritizedLetter(base, DiacriticMark(vowel=Vowel.SHURUK, shin_dot=shin_dot))
    gemination = label.endswith("+g")
    name = label[:-2] if gemination else label
    vowel = None if name == "none" else _VOWEL_BY_NAME[name]
    return DiacritizedLetter(base, DiacriticMark(vowel, gemination, shin_dot))


def word_labels(word: DiacritizedWord) -> tuple[str, ...]:
    return tuple(label_of_letter(letter) for letter in word.letters)


def valid_labels(surface: str, position: int, labels=None) -> list[int]:
    """Label ids legal for the letter at ``position`` of ``surface``."""
    base = surface[position]
    final = position == len(surface) - 1
    out = []
    for idx in range(len(LABELS)) if labels is None else labels:
        label = LABELS[idx]
        if label == "shuruk" and base != VAV:
            continue
        if label == MATER_LABEL and base not in MATER_LETTERS:
            continue
        if label.endswith("+g") and final and base == ALEF:
            continue
        out.append(idx)
    return out


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


@dataclass
class DiacritizerConfig:
    char_dim: int = 32
    char_hidden: int = 32
    word_dim: int = 64
    word_hidden: int = 32
    label_dim: int = 16
    hist_hidden: int = 32
    mlp_hidden: int = 32
    layers: int = 2
    beam_width: int = 8
    freq_weight: float = 0.0  # optional log-frequency prior on known words
    words: list[str] = field(default_factory=list)

    @property
    def letter_dim(self) -> int:
        return 2 * self.char_hidden + 2 * self.word_hidden

    def to_dict(self) -> dict:
        return {
            "char_dim": self.char_dim,
            "char_hidden": self.char_hidden,
            "word_dim": self.word_dim,
            "word_hidden": self.word_hidden,
            "label_dim": self.label_dim,
            "hist_hidden": self.hist_hidden,
            "mlp_hidden": self.mlp_hidden,
            "layers": self.layers,
            "beam_width": self.beam_width,
            "freq_weight": self.freq_weight,
            "words": list(self.words),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiacritizerConfig":
        return cls(**data)


@dataclass
class SentenceEncoding:
    """Per-letter encodings h'(c_j) for every word of one sentence."""

    surfaces: list[str]
    letters: list[np.ndarray]  # per word: (len(word), letter_dim)
    char_spans: list[tuple[int, int]]
    char_len: int


@dataclass(frozen=True)
class BeamHypothesis:
    labels: tuple[int, ...]
    score: float

    def label_names(self) -> tuple[str, ...]:
        return tuple(LABELS[i] for i in self.labels)


class Diacritizer:
    """Owns diacritizer parameters; instances are not thread-safe."""

    def __init__(self, config: DiacritizerConfig | None = None, seed: int = 0):
        self.config = config or DiacritizerConfig()
        cfg = self.config
        self.word_index = {w: i + 1 for i, w in enumerate(cfg.words)}
        rng = np.random.default_rng(seed)
        self.bank = ParamBank()
        self.char_emb = Embedding(self.bank, "dia.char_emb", CHAR_VOCAB, cfg.char_dim, rng)
        self.char_enc = BiLSTMStack(
            self.bank, "dia.char_enc", cfg.char_dim, cfg.char_hidden, rng, cfg.layers
        )
        self.word_emb = Embedding(
            self.bank, "dia.word_emb", len(cfg.words) + 1, cfg.word_dim, rng
        )
        self.word_enc = BiLSTMStack(
            self.bank, "dia.word_enc", cfg.word_dim, cfg.word_hidden, rng, cfg.layers
        )
        self.label_emb = Embedding(
            self.bank, "dia.label_emb", len(LABELS) + 1, cfg.label_dim, rng
        )
        self.bos_id = len(LABELS)
        # label-history LSTM cell weights (single layer, stepped manually)
        self.bank.add(
            "dia.hist.W", (4 * cfg.hist_hidden, cfg.label_dim + cfg.hist_hidden), rng
        )
        self.bank.add("dia.hist.b", (4 * cfg.hist_hidden,))
        self.out_mlp = MLP(
            self.bank,
            "dia.out",
            [cfg.letter_dim + cfg.hist_hidden, cfg.mlp_hidden, len(LABELS)],
            rng,
        )
        self.shin_mlp = MLP(self.bank, "dia.shin", [cfg.letter_dim, cfg.mlp_hidden, 2], rng)

    @classmethod
    def with_bank(cls, config: DiacritizerConfig, bank: ParamBank) -> "Diacritizer":
        fresh = cls(config, seed=0)
        if fresh.bank.names() != bank.names():
            raise NNError("weight file does not match the diacritizer configuration")
        for name in bank.names():
            if fresh.bank[name].shape != bank[name].shape:
                raise NNError(f"tensor {name!r} has unexpected shape")
            np.copyto(fresh.bank[name], bank[name])
        return fresh

    def _reset(self) -> None:
        for layer in (
            self.char_emb,
            self.char_enc,
            self.word_emb,
            self.word_enc,
            self.label_emb,
            self.out_mlp,
            self.shin_mlp,
        ):
            layer.reset()

    # -- sentence encoding ----------------------------------------------------

    def encode_sentence(self, surfaces: list[str]) -> SentenceEncoding:
        """h'(c_j) = (sentence char-encoder state; containing word's state)."""
        if not surfaces:
            raise NNError("empty sentence")
        self._reset()
        char_ids: list[int] = []
        spans = []
        for i, surface in enumerate(surfaces):
            if i:
                char_ids.append(_CHAR_SEP)
            start = len(char_ids)
            for ch in surface:
                char_ids.append(_CHARS.get(ch, _CHAR_UNK) if is_hebrew_letter(ch) else _CHAR_UNK)
            spans.append((start, len(char_ids)))
        char_states = self.char_enc.forward(self.char_emb.forward(char_ids))
        word_ids = [self.word_index.get(s, 0) for s in surfaces]
        word_states = self.word_enc.forward(self.word_emb.forward(word_ids))
        letters = []
        for i, (start, end) in enumerate(spans):
            block = np.concatenate(
                [char_states[start:end], np.tile(word_states[i], (end - start, 1))], axis=1
            )
            letters.append(block)
        return SentenceEncoding(list(surfaces), letters, spans, len(char_ids))

    # -- history LSTM (manual single cell) -------------------------------------

    def _hist_init(self) -> tuple[np.ndarray, np.ndarray]:
        H = self.config.hist_hidden
        return np.zeros(H), np.zeros(H)

    def _hist_step(
        self, state: tuple[np.ndarray, np.ndarray], label_vec: np.ndarray
    ) -> tuple[tuple[np.ndarray, np.ndarray], dict]:
        H = self.config.hist_hidden
        h_prev, c_prev = state
        W = self.bank["dia.hist.W"]
        b = self.bank["dia.hist.b"]
        xh = np.concatenate([label_vec, h_prev])
        z = W @ xh + b
        i = sigmoid(z[0:H])
        f = sigmoid(z[H : 2 * H])
        g = np.tanh(z[2 * H : 3 * H])
        o = sigmoid(z[3 * H : 4 * H])
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        cache = {"xh": xh, "i": i, "f": f, "g": g, "o": o, "c_prev": c_prev, "tc": tc}
        return (h, c), cache

    def _hist_backward(self, cache: dict, dh: np.ndarray, dc: np.ndarray):
        H = self.config.hist_hidden
        W = self.bank["dia.hist.W"]
        do = dh * cache["tc"]
        dc = dc + dh * cache["o"] * (1.0 - cache["tc"] ** 2)
        di = dc * cache["g"]
        df = dc * cache["c_prev"]
        dg = dc * cache["i"]
        dc_prev = dc * cache["f"]
        dz = np.concatenate(
            [
                di * cache["i"] * (1.0 - cache["i"]),
                df * cache["f"] * (1.0 - cache["f"]),
                dg * (1.0 - cache["g"] ** 2),
                do * cache["o"] * (1.0 - cache["o"]),
            ]
        )
        self.bank.grad("dia.hist.W")[:] += np.outer(dz, cache["xh"])
        self.bank.grad("dia.hist.b")[:] += dz
        dxh = W.T @ dz
        d_label = dxh[: self.config.label_dim]
        dh_prev = dxh[self.config.label_dim :]
        return d_label, dh_prev, dc_prev

    # -- scoring ----------------------------------------------------------------

    def _label_vec(self, label_id: int) -> np.ndarray:
        return self.bank["dia.label_emb"][label_id]

    def score_sequence(self, letters: np.ndarray, label_ids) -> float:
        """Chain-rule log-probability of a label sequence for one word."""
        label_ids = list(label_ids)
        if len(label_ids) != len(letters):
            raise NNError(
                f"{len(label_ids)} labels for {len(letters)} letters"
            )
        state, _ = self._hist_step(self._hist_init(), self._label_vec(self.bos_id))
        total = 0.0
        for j, label in enumerate(label_ids):
            logits = self.out_mlp.infer(np.concatenate([letters[j], state[0]]))
            total += float(log_softmax(logits)[label])
            if j + 1 < len(label_ids):
                state, _ = self._hist_step(state, self._label_vec(label))
        return total

    def rank_known(
        self, letters: np.ndarray, candidates: CandidateSet
    ) -> list[tuple[Candidate, float]]:
        """All candidates scored and sorted descending; ties keep input order."""
        if not candidates.candidates:
            raise NNError("rank_known requires a non-empty candidate set")
        scored = []
        for cand in candidates.candidates:
            score = self.score_sequence(letters, [LABEL_INDEX[l] for l in word_labels(cand.word)])
            if self.config.freq_weight:
                score += self.config.freq_weight * np.log(max(cand.frequency, 1))
            scored.append((cand, score))
        return sorted(scored, key=lambda pair: -pair[1])

    def beam_search(
        self,
        letters: np.ndarray,
        surface: str,
        k: int | None = None,
        alphabet: list[int] | None = None,
    ) -> list[BeamHypothesis]:
        """Top-k label sequences by per-letter beam expansion.

        Letter/label validity is pruned per position. Ties break by
        higher score then lexicographic label ids.
        """
        if k is None:
            k = self.config.beam_width
        if k < 1:
            raise NNError("beam width must be at least 1")
        if len(surface) != len(letters):
            raise NNError("surface and letter encodings disagree")
        start_state, _ = self._hist_step(self._hist_init(), self._label_vec(self.bos_id))
        beam: list[tuple[tuple[int, ...], float, tuple[np.ndarray, np.ndarray]]] = [
            ((), 0.0, start_state)
        ]
        for j in range(len(surface)):
            legal = valid_labels(surface, j, alphabet)
            if not legal:
                raise NNError(f"no legal label for letter {j} of {surface!r}")
            expansions = []
            for labels, score, state in beam:
                logits = self.out_mlp.infer(np.concatenate([letters[j], state[0]]))
                logp = log_softmax(logits)
                for label in legal:
                    expansions.append((labels + (label,), score + float(logp[label]), state))
            expansions.sort(key=lambda e: (-e[1], e[0]))
            kept = expansions[:k]
            if j + 1 < len(surface):
                beam = [
                    (labels, score, self._hist_step(state, self._label_vec(labels[-1]))[0])
                    for labels, score, state in kept
                ]
            else:
                beam = kept
        return [BeamHypothesis(labels, score) for labels, score, _ in beam]

    def predict_shin_dot(self, letters: np.ndarray, surface: str) -> dict[int, ShinDotSide]:
        """Independent binary choice at each shin; empty if no shin."""
        out = {}
        for j, ch in enumerate(surface):
            if ch != "ש":
                continue
            logits = self.shin_mlp.infer(letters[j])
            out[j] = ShinDotSide.RIGHT if logits[0] >= logits[1] else ShinDotSide.LEFT
        return out

    # -- training -----------------------------------------------------------------

    def train_loss(self, surfaces: list[str], gold_words: list[DiacritizedWord]) -> float:
        """Mean cross-entropy over letter labels and shin dots; fills grads."""
        if len(surfaces) != len(gold_words):
            raise NNError("one gold word per surface required")
        cfg = self.config
        self._reset()

        # forward encoders (cached for backward)
        char_ids: list[int] = []
        spans = []
        for i, surface in enumerate(surfaces):
            if i:
                char_ids.append(_CHAR_SEP)
            start = len(char_ids)
            for ch in surface:
                char_ids.append(_CHARS.get(ch, _CHAR_UNK) if is_hebrew_letter(ch) else _CHAR_UNK)
            spans.append((start, len(char_ids)))
        char_states = self.char_enc.forward(self.char_emb.forward(char_ids))
        word_ids = [self.word_index.get(s, 0) for s in surfaces]
        word_states = self.word_enc.forward(self.word_emb.forward(word_ids))

        terms = sum(len(w.letters) for w in gold_words) + sum(
            1 for w in gold_words for l in w.letters if l.base == "ש" and not l.mater_deleted
        )
        scale = 1.0 / max(terms, 1)
        total = 0.0
        d_char_states = np.zeros_like(char_states)
        d_word_states = np.zeros_like(word_states)

        for i, word in enumerate(gold_words):
            start, end = spans[i]
            labels = [LABEL_INDEX[l] for l in word_labels(word)]
            m = len(labels)
            if m != end - start:
                raise NNError(f"gold word {i} does not match its surface length")

            # teacher-forced history forward
            label_vec_ids = [self.bos_id] + labels[:-1]
            states = []
            caches = []
            state = self._hist_init()
            for vid in label_vec_ids:
                state, cache = self._hist_step(state, self._label_vec(vid))
                states.append(state)
                caches.append(cache)

            d_h_letters = np.zeros((m, cfg.letter_dim))
            d_hist_h = [np.zeros(cfg.hist_hidden) for _ in range(m)]
            for j in range(m):
                h_letter = np.concatenate([char_states[start + j], word_states[i]])
                feat = np.concatenate([h_letter, states[j][0]])
                logits = self.out_mlp.forward(feat)
                loss, dlogits = softmax_cross_entropy(logits, labels[j])
                total += loss
                d_feat = self.out_mlp.backward(dlogits * scale)
                d_h_letters[j] += d_feat[: cfg.letter_dim]
                d_hist_h[j] += d_feat[cfg.letter_dim :]

                letter = word.letters[j]
                if letter.base == "ש" and not letter.mater_deleted:
                    target = 0 if letter.mark.shin_dot is not ShinDotSide.LEFT else 1
                    s_logits = self.shin_mlp.forward(h_letter)
                    s_loss, s_dlogits = softmax_cross_entropy(s_logits, target)
                    total += s_loss
                    d_h_letters[j] += self.shin_mlp.backward(s_dlogits * scale)

            # history backward through time
            dh = np.zeros(cfg.hist_hidden)
            dc = np.zeros(cfg.hist_hidden)
            d_label_vecs = np.zeros((m, cfg.label_dim))
            for j in range(m - 1, -1, -1):
                dh = dh + d_hist_h[j]
                d_label, dh, dc = self._hist_backward(caches[j], dh, dc)
                d_label_vecs[j] = d_label
            np.add.at(
                self.bank.grad("dia.label_emb"),
                np.asarray(label_vec_ids, dtype=np.intp),
                d_label_vecs,
            )

            d_char_states[start:end] += d_h_letters[:, : 2 * cfg.char_hidden]
            d_word_states[i] += d_h_letters[:, 2 * cfg.char_hidden :].sum(axis=0)

        self.char_emb.backward(self.char_enc.backward(d_char_states))
        self.word_emb.backward(self.word_enc.backward(d_word_states))
        return total * scale
