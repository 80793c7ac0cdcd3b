"""Two-stage morphological tagger constrained by the lexicon.

Stage one predicts the coarse POS of every word from sentence-wide
character and word encoders plus embeddings of the analyses the lexicon
allows. Stage two predicts fine-grained properties from features that are
deliberately blind to the word's characters: the word-encoder state joined
with an encoder over (tag embedding; tag-restricted analysis embedding).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hebrew import is_hebrew_letter
from .lexicon import (
    CandidateSet,
    Lexicon,
    MorphAnalysis,
    POS_TAGS,
    PROPERTY_KEYS,
    PROPERTY_SCHEMA,
    PROPERTY_VALUES,
)
from .nn import (
    MLP,
    BiLSTMStack,
    Embedding,
    NNError,
    ParamBank,
    log_softmax,
    softmax,
    softmax_cross_entropy,
)

NONE_VALUE = "<none>"

# Analysis-possibility categories embedded in feature component (c).
COARSE_CATEGORIES = ("pos", "Gender", "Number", "Person", "State", "SuffixType")
FINE_CATEGORIES = ("Gender", "Number", "Person", "State", "SuffixType")

_CHAR_UNK = 0
_CHAR_SEP = 1
_CHARS = {chr(c): i + 2 for i, c in enumerate(range(ord("א"), ord("ת") + 1))}
CHAR_VOCAB = len(_CHARS) + 2

_POS_INDEX = {tag: i for i, tag in enumerate(POS_TAGS)}


def category_values(category: str) -> tuple[str, ...]:
    if category == "pos":
        return POS_TAGS
    return tuple(sorted(PROPERTY_VALUES[category]))


def property_classes(key: str) -> tuple[str, ...]:
    """Output classes of a property head; absence is an explicit class."""
    return tuple(sorted(PROPERTY_VALUES[key])) + (NONE_VALUE,)


@dataclass
class TaggerConfig:
    char_dim: int = 32
    char_hidden: int = 32
    word_dim: int = 64
    word_hidden: int = 32
    cat_dim: int = 4
    tag_dim: int = 8
    enc_hidden: int = 64
    fine_hidden: int = 32
    mlp_hidden: int = 32
    layers: int = 2
    words: list[str] = field(default_factory=list)  # id 0 is the unknown word

    @property
    def coarse_input_dim(self) -> int:
        return (
            2 * self.char_hidden
            + 2 * self.word_hidden
            + len(COARSE_CATEGORIES) * self.cat_dim
            + 2
        )

    def feature_slices(self) -> dict[str, slice]:
        a = 2 * self.char_hidden
        b = a + 2 * self.word_hidden
        c = b + len(COARSE_CATEGORIES) * self.cat_dim
        return {
            "chars": slice(0, a),
            "word": slice(a, b),
            "analyses": slice(b, c),
            "bits": slice(c, c + 2),
        }

    def to_dict(self) -> dict:
        return {
            "char_dim": self.char_dim,
            "char_hidden": self.char_hidden,
            "word_dim": self.word_dim,
            "word_hidden": self.word_hidden,
            "cat_dim": self.cat_dim,
            "tag_dim": self.tag_dim,
            "enc_hidden": self.enc_hidden,
            "fine_hidden": self.fine_hidden,
            "mlp_hidden": self.mlp_hidden,
            "layers": self.layers,
            "words": list(self.words),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaggerConfig":
        return cls(**data)


@dataclass(frozen=True)
class TagPrediction:
    """Coarse tag with its distribution; fine properties once predicted."""

    pos: str
    pos_distribution: np.ndarray
    properties: dict[str, tuple[str, np.ndarray]] = field(default_factory=dict)

    def analysis(self) -> MorphAnalysis:
        props = {k: v for k, (v, _) in self.properties.items() if v != NONE_VALUE}
        return MorphAnalysis.make(self.pos, **props)


@dataclass
class CoarseEncoding:
    """Per-token feature vectors plus the caches training reuses."""

    features: np.ndarray  # (tokens, coarse_input_dim)
    word_states: np.ndarray  # (tokens, 2*word_hidden)
    char_spans: list[tuple[int, int]]
    sets: list[CandidateSet]
    cat_ids: list[dict[str, np.ndarray]]


def load_word_vectors(path) -> dict[str, np.ndarray]:
    """Plain text embeddings: ``word v1 v2 ...`` per line."""
    vectors = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            try:
                vectors[parts[0]] = np.array([float(v) for v in parts[1:]])
            except ValueError as exc:
                raise NNError(f"{path}:{lineno}: bad vector component") from exc
    return vectors


class Tagger:
    """Owns all tagger parameters; one instance is not thread-safe."""

    def __init__(
        self,
        lexicon: Lexicon,
        proper_nouns: frozenset[str] = frozenset(),
        config: TaggerConfig | None = None,
        seed: int = 0,
        word_vectors: dict[str, np.ndarray] | None = None,
    ):
        self.lexicon = lexicon
        self.proper_nouns = proper_nouns
        self.config = config or TaggerConfig()
        cfg = self.config
        self.word_index = {w: i + 1 for i, w in enumerate(cfg.words)}
        rng = np.random.default_rng(seed)
        self.bank = ParamBank()
        self.char_emb = Embedding(self.bank, "tag.char_emb", CHAR_VOCAB, cfg.char_dim, rng)
        self.char_enc = BiLSTMStack(
            self.bank, "tag.char_enc", cfg.char_dim, cfg.char_hidden, rng, cfg.layers
        )
        self.word_emb = Embedding(
            self.bank, "tag.word_emb", len(cfg.words) + 1, cfg.word_dim, rng
        )
        self.word_enc = BiLSTMStack(
            self.bank, "tag.word_enc", cfg.word_dim, cfg.word_hidden, rng, cfg.layers
        )
        for cat in COARSE_CATEGORIES:
            self.bank.add(f"tag.cat.{cat}", (len(category_values(cat)), cfg.cat_dim), rng)
        self.coarse_enc = BiLSTMStack(
            self.bank, "tag.coarse_enc", cfg.coarse_input_dim, cfg.enc_hidden, rng, cfg.layers
        )
        self.pos_mlp = MLP(
            self.bank, "tag.pos_mlp", [2 * cfg.enc_hidden, cfg.mlp_hidden, len(POS_TAGS)], rng
        )
        self.tag_emb = Embedding(self.bank, "tag.tag_emb", len(POS_TAGS), cfg.tag_dim, rng)
        fine_in = cfg.tag_dim + len(FINE_CATEGORIES) * cfg.cat_dim
        self.fine_enc = BiLSTMStack(
            self.bank, "tag.fine_enc", fine_in, cfg.fine_hidden, rng, cfg.layers
        )
        self.prop_mlps = {}
        fine_feat = 2 * cfg.word_hidden + 2 * cfg.fine_hidden
        for key in PROPERTY_KEYS:
            self.prop_mlps[key] = MLP(
                self.bank,
                f"tag.prop.{key}",
                [fine_feat, cfg.mlp_hidden, len(property_classes(key))],
                rng,
            )
        if word_vectors:
            table = self.bank["tag.word_emb"]
            for word, vec in word_vectors.items():
                idx = self.word_index.get(word)
                if idx is not None and vec.shape == (cfg.word_dim,):
                    table[idx] = vec

    @classmethod
    def with_bank(
        cls,
        lexicon: Lexicon,
        proper_nouns: frozenset[str],
        config: TaggerConfig,
        bank: ParamBank,
    ) -> "Tagger":
        """Rebuild a tagger around weights loaded from a file."""
        fresh = cls(lexicon, proper_nouns, config, seed=0)
        if fresh.bank.names() != bank.names():
            raise NNError("weight file does not match the tagger configuration")
        for name in bank.names():
            if fresh.bank[name].shape != bank[name].shape:
                raise NNError(f"tensor {name!r} has unexpected shape")
            np.copyto(fresh.bank[name], bank[name])
        return fresh

    def _reset(self) -> None:
        """Drop stale forward caches so inference calls do not accumulate."""
        layers = [
            self.char_emb,
            self.char_enc,
            self.word_emb,
            self.word_enc,
            self.coarse_enc,
            self.pos_mlp,
            self.tag_emb,
            self.fine_enc,
            *self.prop_mlps.values(),
        ]
        for layer in layers:
            layer.reset()

    # -- feature assembly ---------------------------------------------------

    def _char_sequence(self, surfaces: list[str]) -> tuple[list[int], list[tuple[int, int]]]:
        ids: list[int] = []
        spans: list[tuple[int, int]] = []
        for i, surface in enumerate(surfaces):
            if i:
                ids.append(_CHAR_SEP)
            start = len(ids)
            for ch in surface:
                ids.append(_CHARS.get(ch, _CHAR_UNK) if is_hebrew_letter(ch) else _CHAR_UNK)
            spans.append((start, len(ids)))
        return ids, spans

    def _category_ids(self, cands: CandidateSet, categories, pos: str | None = None):
        """Value-set indices per category, restricted to ``pos`` if given."""
        options = [
            c.analysis
            for c in cands.candidates
            if pos is None or c.analysis.pos == pos
        ]
        out: dict[str, np.ndarray] = {}
        for cat in categories:
            values = category_values(cat)
            if cat == "pos":
                present = {a.pos for a in options}
            else:
                present = {a.get(cat) for a in options} - {None}
            out[cat] = np.array(
                sorted(values.index(v) for v in present), dtype=np.intp
            )
        return out

    def _sum_category(self, name: str, ids: np.ndarray) -> np.ndarray:
        if ids.size == 0:
            return np.zeros(self.config.cat_dim)
        return self.bank[name][ids].sum(axis=0)

    def _word_ids(self, surfaces: list[str]) -> list[int]:
        return [self.word_index.get(s, 0) for s in surfaces]

    def encode_coarse(
        self, surfaces: list[str], sets: list[CandidateSet] | None = None
    ) -> CoarseEncoding:
        """Assemble per-token coarse features (a|b|c|d) for one sentence."""
        if not surfaces:
            raise NNError("empty sentence")
        self._reset()
        if sets is None:
            sets = [self.lexicon.lookup(s) for s in surfaces]
        char_ids, spans = self._char_sequence(surfaces)
        char_states = self.char_enc.forward(self.char_emb.forward(char_ids))
        word_states = self.word_enc.forward(
            self.word_emb.forward(self._word_ids(surfaces))
        )
        rows = []
        cat_ids = []
        for i, surface in enumerate(surfaces):
            start, end = spans[i]
            summed = char_states[start:end].sum(axis=0)
            ids = self._category_ids(sets[i], COARSE_CATEGORIES)
            cat_ids.append(ids)
            analysis_vec = np.concatenate(
                [self._sum_category(f"tag.cat.{cat}", ids[cat]) for cat in COARSE_CATEGORIES]
            )
            bits = np.array(
                [1.0 if surface in self.proper_nouns else 0.0, 1.0 if sets[i].known else 0.0]
            )
            rows.append(np.concatenate([summed, word_states[i], analysis_vec, bits]))
        return CoarseEncoding(np.array(rows), word_states, spans, list(sets), cat_ids)

    # -- prediction ----------------------------------------------------------

    def allowed_tags(self, cands: CandidateSet) -> frozenset[str]:
        """Lexicon constraint: known words keep their tags, unknown allow all."""
        if cands.known and cands.candidates:
            return cands.pos_values()
        return frozenset(POS_TAGS)

    def predict_pos(
        self, encoding: CoarseEncoding, allowed: list[frozenset[str]] | None = None
    ) -> list[TagPrediction]:
        """Constrained argmax over the coarse softmax, per token."""
        if allowed is None:
            allowed = [self.allowed_tags(cs) for cs in encoding.sets]
        if len(allowed) != len(encoding.features):
            raise NNError("one allowed set per token required")
        states = self.coarse_enc.forward(encoding.features)
        logits = self.pos_mlp.forward(states)
        predictions = []
        for i, tags in enumerate(allowed):
            if not tags:
                raise NNError(f"empty allowed tag set at token {i}")
            dist = softmax(logits[i])
            masked = np.full(len(POS_TAGS), -np.inf)
            for tag in tags:
                masked[_POS_INDEX[tag]] = logits[i][_POS_INDEX[tag]]
            predictions.append(TagPrediction(POS_TAGS[int(np.argmax(masked))], dist))
        return predictions

    def _fine_inputs(
        self, tags: list[str], sets: list[CandidateSet]
    ) -> tuple[np.ndarray, list[dict[str, np.ndarray]]]:
        tag_vecs = self.tag_emb.forward([_POS_INDEX[t] for t in tags])
        rows = []
        all_ids = []
        for i, tag in enumerate(tags):
            ids = self._category_ids(sets[i], FINE_CATEGORIES, pos=tag)
            all_ids.append(ids)
            vec = np.concatenate(
                [self._sum_category(f"tag.cat.{cat}", ids[cat]) for cat in FINE_CATEGORIES]
            )
            rows.append(np.concatenate([tag_vecs[i], vec]))
        return np.array(rows), all_ids

    def _allowed_property_values(
        self, cands: CandidateSet, tag: str, key: str
    ) -> frozenset[str]:
        if not cands.known:
            return frozenset(property_classes(key))
        values = set()
        for c in cands.candidates:
            if c.analysis.pos == tag:
                values.add(c.analysis.get(key) or NONE_VALUE)
        return frozenset(values) if values else frozenset(property_classes(key))

    def predict_morph(
        self,
        encoding: CoarseEncoding,
        coarse: list[TagPrediction],
    ) -> list[TagPrediction]:
        """Fine properties per token, licensed by the coarse tag."""
        tags = [p.pos for p in coarse]
        fine_in, _ = self._fine_inputs(tags, encoding.sets)
        fine_states = self.fine_enc.forward(fine_in)
        out = []
        for i, tag in enumerate(tags):
            feat = np.concatenate([encoding.word_states[i], fine_states[i]])
            props: dict[str, tuple[str, np.ndarray]] = {}
            for key in sorted(PROPERTY_SCHEMA[tag]):
                classes = property_classes(key)
                logits = self.prop_mlps[key].forward(feat)
                dist = softmax(logits)
                allowed = self._allowed_property_values(encoding.sets[i], tag, key)
                masked = np.full(len(classes), -np.inf)
                for v in allowed:
                    masked[classes.index(v)] = logits[classes.index(v)]
                props[key] = (classes[int(np.argmax(masked))], dist)
            out.append(TagPrediction(tag, coarse[i].pos_distribution, props))
        return out

    def tag_sentence(
        self, surfaces: list[str], sets: list[CandidateSet] | None = None
    ) -> list[TagPrediction]:
        encoding = self.encode_coarse(surfaces, sets)
        return self.predict_morph(encoding, self.predict_pos(encoding))

    # -- training ------------------------------------------------------------

    def train_loss(self, surfaces: list[str], gold: list[MorphAnalysis]) -> float:
        """Mean cross-entropy of both stages; fills gradients (no update).

        The fine stage is teacher-forced with the gold coarse tags.
        """
        if len(surfaces) != len(gold):
            raise NNError("one gold analysis per token required")
        cfg = self.config
        n = len(surfaces)
        tags = [a.pos for a in gold]
        terms = n + sum(len(PROPERTY_SCHEMA[t]) for t in tags)
        scale = 1.0 / terms

        encoding = self.encode_coarse(surfaces)
        states = self.coarse_enc.forward(encoding.features)
        logits = self.pos_mlp.forward(states)

        total = 0.0
        d_logits = np.zeros_like(logits)
        for i, analysis in enumerate(gold):
            loss, grad = softmax_cross_entropy(logits[i], _POS_INDEX[analysis.pos])
            total += loss
            d_logits[i] = grad * scale

        fine_in, fine_ids = self._fine_inputs(tags, encoding.sets)
        fine_states = self.fine_enc.forward(fine_in)
        fine_feats = np.concatenate([encoding.word_states, fine_states], axis=1)

        d_fine_feats = np.zeros_like(fine_feats)
        for key in PROPERTY_KEYS:
            rows = [i for i in range(n) if key in PROPERTY_SCHEMA[tags[i]]]
            if not rows:
                continue
            classes = property_classes(key)
            head = self.prop_mlps[key]
            out = head.forward(fine_feats[rows])
            d_out = np.zeros_like(out)
            for r, i in enumerate(rows):
                target = gold[i].get(key) or NONE_VALUE
                loss, grad = softmax_cross_entropy(out[r], classes.index(target))
                total += loss
                d_out[r] = grad * scale
            d_back = head.backward(d_out)
            for r, i in enumerate(rows):
                d_fine_feats[i] += d_back[r]

        total *= scale

        # fine stage backward
        d_fine_states = d_fine_feats[:, 2 * cfg.word_hidden :]
        d_word_states = d_fine_feats[:, : 2 * cfg.word_hidden].copy()
        d_fine_in = self.fine_enc.backward(d_fine_states)
        self.tag_emb.backward(d_fine_in[:, : cfg.tag_dim])
        for i in range(n):
            offset = cfg.tag_dim
            for cat in FINE_CATEGORIES:
                ids = fine_ids[i][cat]
                piece = d_fine_in[i, offset : offset + cfg.cat_dim]
                if ids.size:
                    np.add.at(self.bank.grad(f"tag.cat.{cat}"), ids, piece)
                offset += cfg.cat_dim

        # coarse stage backward
        d_states = self.pos_mlp.backward(d_logits)
        d_features = self.coarse_enc.backward(d_states)
        slices = cfg.feature_slices()
        d_chars_sum = d_features[:, slices["chars"]]
        d_word_states += d_features[:, slices["word"]]
        d_analysis = d_features[:, slices["analyses"]]

        char_len = encoding.char_spans[-1][1]
        d_char_states = np.zeros((char_len, 2 * cfg.char_hidden))
        for i, (start, end) in enumerate(encoding.char_spans):
            d_char_states[start:end] += d_chars_sum[i]
        self.char_emb.backward(self.char_enc.backward(d_char_states))

        for i in range(n):
            offset = 0
            for cat in COARSE_CATEGORIES:
                ids = encoding.cat_ids[i][cat]
                piece = d_analysis[i, offset : offset + cfg.cat_dim]
                if ids.size:
                    np.add.at(self.bank.grad(f"tag.cat.{cat}"), ids, piece)
                offset += cfg.cat_dim

        self.word_emb.backward(self.word_enc.backward(d_word_states))
        return total
