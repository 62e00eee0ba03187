// Copyright 2026 The sasr Authors
// Licensed under the Apache License, Version 2.0
//
// Forward computation of the speaker-attributed ASR model: paired acoustic
// and speaker encoders, location-aware content attention, a decoder RNN, a
// speaker-query RNN with cosine attention over a profile inventory, and the
// token output head. Everything is a pure function of (parameters, inputs),
// so toy deterministic parameters exercise the whole computation.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sasr/error.hpp"
#include "sasr/linalg.hpp"

namespace sasr {

using TokenId = std::int32_t;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct FeatureSequence {
    Matrix frames;               // T x F
    double frame_shift_seconds = 0.01;
};

struct SpeakerProfile {
    std::string speaker_id;
    Vec embedding;
};

struct SpeakerInventory {
    std::vector<SpeakerProfile> profiles;

    std::size_t size() const { return profiles.size(); }

    std::size_t embedding_dim() const {
        return profiles.empty() ? 0 : profiles.front().embedding.size();
    }

    void validate() const {
        if (profiles.empty()) {
            throw ConfigError("SpeakerInventory: no profiles");
        }
        std::set<std::string> ids;
        const std::size_t dim = profiles.front().embedding.size();
        for (const auto &p : profiles) {
            if (!ids.insert(p.speaker_id).second) {
                throw ConfigError("SpeakerInventory: duplicate speaker id " +
                                  p.speaker_id);
            }
            if (p.embedding.size() != dim) {
                throw ConfigError("SpeakerInventory: mixed embedding dims");
            }
            if (norm(p.embedding) == 0.0) {
                throw DomainError("SpeakerInventory: zero profile " +
                                  p.speaker_id);
            }
        }
    }
};

struct EncodedInput {
    Matrix h_enc;  // T' x D_enc
    Matrix h_spk;  // T' x D_spk, same row count as h_enc

    std::size_t length() const { return h_enc.rows(); }
};

struct Vocabulary {
    std::vector<std::string> tokens;
    TokenId sos_id = -1;
    TokenId eos_id = -1;
    TokenId sc_id = -1;
    std::string word_boundary = "\xe2\x96\x81";  // "▁"

    std::size_t size() const { return tokens.size(); }

    bool is_reserved(TokenId id) const {
        return id == sos_id || id == eos_id || id == sc_id;
    }

    void validate() const {
        if (sos_id < 0 || eos_id < 0 || sc_id < 0) {
            throw SchemaError("Vocabulary: reserved symbols not declared");
        }
        if (sc_id == eos_id) {
            throw SchemaError("Vocabulary: <sc> and <eos> must differ");
        }
        const auto n = static_cast<TokenId>(tokens.size());
        if (sos_id >= n || eos_id >= n || sc_id >= n) {
            throw SchemaError("Vocabulary: reserved id out of range");
        }
        std::set<std::string> seen;
        for (const auto &t : tokens) {
            if (t.empty() || !seen.insert(t).second) {
                throw SchemaError("Vocabulary: empty or duplicate token");
            }
        }
    }

    // Subword ids -> plain text. Tokens starting with the word-boundary
    // marker begin a new word; reserved ids are skipped.
    std::string detokenize(std::span<const TokenId> ids) const {
        std::string out;
        for (TokenId id : ids) {
            if (id < 0 || id >= static_cast<TokenId>(tokens.size())) {
                throw ContractError("detokenize: token id out of range");
            }
            if (is_reserved(id)) continue;
            const std::string &t = tokens[id];
            if (t.rfind(word_boundary, 0) == 0) {
                if (!out.empty()) out += ' ';
                out += t.substr(word_boundary.size());
            } else {
                out += t;
            }
        }
        return out;
    }

    // Text format: "#!key value" header lines (sos/eos/sc/wb), then one
    // token per line in id order.
    static Vocabulary parse(const std::string &text) {
        Vocabulary v;
        std::map<std::string, std::string> header;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.rfind("#!", 0) == 0) {
                const auto sp = line.find(' ');
                if (sp == std::string::npos) {
                    throw SchemaError("Vocabulary: bad header line: " + line);
                }
                header[line.substr(2, sp - 2)] = line.substr(sp + 1);
            } else if (!line.empty()) {
                v.tokens.push_back(line);
            }
        }
        auto find_id = [&](const std::string &key) -> TokenId {
            auto it = header.find(key);
            if (it == header.end()) {
                throw SchemaError("Vocabulary: missing #!" + key + " header");
            }
            for (std::size_t i = 0; i < v.tokens.size(); ++i) {
                if (v.tokens[i] == it->second) {
                    return static_cast<TokenId>(i);
                }
            }
            throw SchemaError("Vocabulary: declared symbol " + it->second +
                              " is not in the token list");
        };
        v.sos_id = find_id("sos");
        v.eos_id = find_id("eos");
        v.sc_id = find_id("sc");
        if (header.count("wb")) v.word_boundary = header["wb"];
        v.validate();
        return v;
    }

    std::string serialize() const {
        std::string out;
        out += "#!sos " + tokens[sos_id] + "\n";
        out += "#!eos " + tokens[eos_id] + "\n";
        out += "#!sc " + tokens[sc_id] + "\n";
        out += "#!wb " + word_boundary + "\n";
        for (const auto &t : tokens) out += t + "\n";
        return out;
    }
};

// ---------------------------------------------------------------------------
// Recurrent cells
// ---------------------------------------------------------------------------

enum class CellKind { kLstm, kElman, kLinear };

inline std::string to_string(CellKind k) {
    switch (k) {
        case CellKind::kLstm: return "lstm";
        case CellKind::kElman: return "elman";
        case CellKind::kLinear: return "linear";
    }
    return "?";
}

inline CellKind cell_kind_from_string(const std::string &s) {
    if (s == "lstm") return CellKind::kLstm;
    if (s == "elman") return CellKind::kElman;
    if (s == "linear") return CellKind::kLinear;
    throw SchemaError("unknown cell kind: " + s);
}

struct CellParams {
    CellKind kind = CellKind::kLstm;
    Matrix w;  // (G*H) x In, G = 4 for lstm else 1
    Matrix u;  // (G*H) x H
    Vec b;     // G*H

    std::size_t gates() const { return kind == CellKind::kLstm ? 4 : 1; }
    std::size_t hidden_dim() const { return b.size() / gates(); }
    std::size_t input_dim() const { return w.cols(); }

    void validate(const std::string &name) const {
        const std::size_t gh = gates() * hidden_dim();
        if (b.size() != gh || w.rows() != gh || u.rows() != gh ||
            u.cols() != hidden_dim()) {
            throw ConfigError("cell " + name + ": inconsistent shapes");
        }
    }
};

struct CellState {
    Vec h;  // hidden
    Vec c;  // lstm cell accumulator, unused for elman/linear
};

inline CellState zero_state(const CellParams &p) {
    return {Vec(p.hidden_dim(), 0.0), Vec(p.hidden_dim(), 0.0)};
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline CellState cell_step(const CellParams &p, std::span<const double> x,
                           const CellState &prev) {
    if (x.size() != p.w.cols()) {
        throw DimensionError("cell_step: input dim " +
                             std::to_string(x.size()) + " vs expected " +
                             std::to_string(p.w.cols()));
    }
    const std::size_t h_dim = p.hidden_dim();
    Vec z = mat_vec(p.w, x);
    Vec uh = mat_vec(p.u, prev.h);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += uh[i] + p.b[i];

    CellState next;
    next.h.resize(h_dim);
    next.c.resize(h_dim, 0.0);
    switch (p.kind) {
        case CellKind::kLstm:
            for (std::size_t i = 0; i < h_dim; ++i) {
                const double in_g = sigmoid(z[i]);
                const double fg = sigmoid(z[h_dim + i]);
                const double g = std::tanh(z[2 * h_dim + i]);
                const double og = sigmoid(z[3 * h_dim + i]);
                next.c[i] = fg * prev.c[i] + in_g * g;
                next.h[i] = og * std::tanh(next.c[i]);
            }
            break;
        case CellKind::kElman:
            for (std::size_t i = 0; i < h_dim; ++i) next.h[i] = std::tanh(z[i]);
            break;
        case CellKind::kLinear:
            next.h = z;
            break;
    }
    return next;
}

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

struct ModelConfig {
    std::size_t feature_dim = 0;   // F
    std::size_t stack_factor = 3;  // frames stacked per encoder step
    std::size_t enc_fwd_dim = 0;
    std::size_t enc_bwd_dim = 0;   // 0 => forward-only encoder
    std::size_t spk_dim = 0;       // profile / query dim
    std::size_t spk_conv_dim = 0;  // intermediate conv channels
    std::size_t spk_kernel = 3;
    std::size_t emb_dim = 0;
    std::size_t att_dim = 0;
    std::size_t loc_filters = 4;
    std::size_t loc_kernel = 11;
    std::size_t vocab_size = 0;
    CellKind enc_cell = CellKind::kLstm;
    CellKind dec_cell = CellKind::kLstm;
    CellKind qry_cell = CellKind::kLstm;
    CellKind out_cell = CellKind::kLstm;
    bool spk_conv_tanh = true;  // nonlinearity between the two conv layers

    std::size_t enc_dim() const { return enc_fwd_dim + enc_bwd_dim; }
};

struct ModelParams {
    ModelConfig config;

    CellParams enc_fwd;  // in: stack*F, hidden: enc_fwd_dim
    CellParams enc_bwd;  // in: stack*F, hidden: enc_bwd_dim (may be empty)

    Matrix spk_conv1_w;  // spk_conv_dim x (stack*F * spk_kernel)
    Vec spk_conv1_b;
    Matrix spk_conv2_w;  // spk_dim x (spk_conv_dim * spk_kernel)
    Vec spk_conv2_b;

    Matrix att_w_u;  // att_dim x D_enc
    Matrix att_w_h;  // att_dim x D_enc
    Matrix att_w_f;  // att_dim x loc_filters
    Vec att_b;       // att_dim
    Vec att_v;       // att_dim
    Matrix loc_w;    // loc_filters x loc_kernel

    Matrix embedding;     // V x emb_dim
    CellParams dec_cell;  // in: emb+D_enc, hidden: D_enc
    CellParams qry_cell;  // in: spk+emb, hidden: spk
    CellParams out_cell;  // in: D_enc, hidden: D_enc

    Matrix out_w_d;  // D_enc x spk
    Matrix out_w;    // V x D_enc
    Vec out_b;       // V

    void validate() const {
        const auto &c = config;
        const std::size_t in = c.stack_factor * c.feature_dim;
        if (c.feature_dim == 0 || c.stack_factor == 0 || c.vocab_size == 0 ||
            c.enc_fwd_dim == 0 || c.spk_dim == 0 || c.att_dim == 0 ||
            c.emb_dim == 0) {
            throw ConfigError("ModelParams: zero dimension in config");
        }
        enc_fwd.validate("enc_fwd");
        if (enc_fwd.input_dim() != in || enc_fwd.hidden_dim() != c.enc_fwd_dim) {
            throw ConfigError("ModelParams: enc_fwd shape");
        }
        if (c.enc_bwd_dim > 0) {
            enc_bwd.validate("enc_bwd");
            if (enc_bwd.input_dim() != in ||
                enc_bwd.hidden_dim() != c.enc_bwd_dim) {
                throw ConfigError("ModelParams: enc_bwd shape");
            }
        }
        if (spk_conv1_w.rows() != c.spk_conv_dim ||
            spk_conv1_w.cols() != in * c.spk_kernel ||
            spk_conv1_b.size() != c.spk_conv_dim ||
            spk_conv2_w.rows() != c.spk_dim ||
            spk_conv2_w.cols() != c.spk_conv_dim * c.spk_kernel ||
            spk_conv2_b.size() != c.spk_dim) {
            throw ConfigError("ModelParams: speaker conv shape");
        }
        if (att_w_u.rows() != c.att_dim || att_w_u.cols() != c.enc_dim() ||
            att_w_h.rows() != c.att_dim || att_w_h.cols() != c.enc_dim() ||
            att_w_f.rows() != c.att_dim || att_w_f.cols() != c.loc_filters ||
            att_b.size() != c.att_dim || att_v.size() != c.att_dim ||
            loc_w.rows() != c.loc_filters || loc_w.cols() != c.loc_kernel) {
            throw ConfigError("ModelParams: attention shape");
        }
        if (embedding.rows() != c.vocab_size || embedding.cols() != c.emb_dim) {
            throw ConfigError("ModelParams: embedding shape");
        }
        dec_cell.validate("dec");
        if (dec_cell.input_dim() != c.emb_dim + c.enc_dim() ||
            dec_cell.hidden_dim() != c.enc_dim()) {
            throw ConfigError("ModelParams: decoder cell shape");
        }
        qry_cell.validate("qry");
        if (qry_cell.input_dim() != c.spk_dim + c.emb_dim ||
            qry_cell.hidden_dim() != c.spk_dim) {
            throw ConfigError("ModelParams: query cell shape");
        }
        out_cell.validate("out");
        if (out_cell.input_dim() != c.enc_dim() ||
            out_cell.hidden_dim() != c.enc_dim()) {
            throw ConfigError("ModelParams: output cell shape");
        }
        if (out_w_d.rows() != c.enc_dim() || out_w_d.cols() != c.spk_dim ||
            out_w.rows() != c.vocab_size || out_w.cols() != c.enc_dim() ||
            out_b.size() != c.vocab_size) {
            throw ConfigError("ModelParams: output head shape");
        }
    }
};

// ---------------------------------------------------------------------------
// Encoders
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix stack_frames(const Matrix &frames, std::size_t factor) {
    const std::size_t t_out = frames.rows() / factor;
    Matrix stacked(t_out, frames.cols() * factor);
    for (std::size_t t = 0; t < t_out; ++t) {
        for (std::size_t j = 0; j < factor; ++j) {
            const auto src = frames.row(t * factor + j);
            std::copy(src.begin(), src.end(),
                      stacked.row(t).begin() + j * frames.cols());
        }
    }
    return stacked;
}

// Same-length 1-D convolution over time with zero padding.
// w is (out_ch x in_ch*kernel), tap j of input channel i at w(o, i*kernel+j).
inline Matrix conv1d_same(const Matrix &in, const Matrix &w, const Vec &b,
                          std::size_t kernel) {
    const std::size_t t_len = in.rows();
    const std::size_t in_ch = in.cols();
    const std::size_t out_ch = w.rows();
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(kernel / 2);
    Matrix out(t_len, out_ch);
    for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t o = 0; o < out_ch; ++o) {
            double acc = b[o];
            for (std::size_t j = 0; j < kernel; ++j) {
                const std::ptrdiff_t src =
                    static_cast<std::ptrdiff_t>(t) +
                    static_cast<std::ptrdiff_t>(j) - center;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_len)) {
                    continue;
                }
                for (std::size_t i = 0; i < in_ch; ++i) {
                    acc += w(o, i * kernel + j) *
                           in(static_cast<std::size_t>(src), i);
                }
            }
            out(t, o) = acc;
        }
    }
    return out;
}

}  // namespace detail

// Runs both encoders over the same frame stream. Both outputs share the
// stacked frame count so one attention row indexes both.
inline EncodedInput encode(const FeatureSequence &x, const ModelParams &p) {
    const auto &c = p.config;
    if (x.frames.rows() == 0) {
        throw DimensionError("encode: empty feature sequence");
    }
    if (x.frames.cols() != c.feature_dim) {
        throw ConfigError("encode: feature dim " +
                          std::to_string(x.frames.cols()) + " vs config " +
                          std::to_string(c.feature_dim));
    }
    const Matrix stacked = detail::stack_frames(x.frames, c.stack_factor);
    const std::size_t t_len = stacked.rows();
    if (t_len == 0) {
        throw DimensionError("encode: fewer frames than one stack");
    }

    EncodedInput enc;
    enc.h_enc = Matrix(t_len, c.enc_dim());
    CellState fwd = zero_state(p.enc_fwd);
    for (std::size_t t = 0; t < t_len; ++t) {
        fwd = cell_step(p.enc_fwd, stacked.row(t), fwd);
        std::copy(fwd.h.begin(), fwd.h.end(), enc.h_enc.row(t).begin());
    }
    if (c.enc_bwd_dim > 0) {
        CellState bwd = zero_state(p.enc_bwd);
        for (std::size_t i = 0; i < t_len; ++i) {
            const std::size_t t = t_len - 1 - i;
            bwd = cell_step(p.enc_bwd, stacked.row(t), bwd);
            std::copy(bwd.h.begin(), bwd.h.end(),
                      enc.h_enc.row(t).begin() + c.enc_fwd_dim);
        }
    }

    Matrix mid = detail::conv1d_same(stacked, p.spk_conv1_w, p.spk_conv1_b,
                                     c.spk_kernel);
    if (c.spk_conv_tanh) {
        for (double &v : mid.data()) v = std::tanh(v);
    }
    enc.h_spk =
        detail::conv1d_same(mid, p.spk_conv2_w, p.spk_conv2_b, c.spk_kernel);
    return enc;
}

// ---------------------------------------------------------------------------
// Attention and decoder step
// ---------------------------------------------------------------------------

struct DecoderState {
    CellState dec;   // dec.h is the decoder state vector
    CellState qry;   // qry.h is the speaker query
    CellState out;   // state of the output head's recurrent layer
    Vec c_prev;      // previous context vector (D_enc)
    Vec alpha_prev;  // previous attention row (T')
    TokenId y_prev = -1;
};

inline DecoderState initial_state(const ModelParams &p, std::size_t t_enc,
                                  TokenId sos_id) {
    if (t_enc == 0) {
        throw DimensionError("initial_state: empty encoding");
    }
    DecoderState s;
    s.dec = zero_state(p.dec_cell);
    s.qry = zero_state(p.qry_cell);
    s.out = zero_state(p.out_cell);
    s.c_prev.assign(p.config.enc_dim(), 0.0);
    s.alpha_prev.assign(t_enc, 1.0 / static_cast<double>(t_enc));
    s.y_prev = sos_id;
    return s;
}

struct StepOutput {
    Vec token_logprobs;  // over V, normalized
    Vec beta;            // over K profiles
    Vec alpha;           // over T'
    Vec q;               // speaker query after this step
    Vec d_bar;           // beta-weighted profile
};

struct StepResult {
    StepOutput out;
    DecoderState next;  // y_prev is unset; commit the chosen token
};

// Location-aware content attention: additive scores over encoder rows plus
// a learned 1-D convolution of the previous attention row.
inline Vec attend(std::span<const double> u, std::span<const double> alpha_prev,
                  const Matrix &h_enc, const ModelParams &p) {
    const auto &c = p.config;
    const std::size_t t_len = h_enc.rows();
    if (alpha_prev.size() != t_len) {
        throw DimensionError("attend: alpha_prev length mismatch");
    }
    if (u.size() != c.enc_dim()) {
        throw DimensionError("attend: decoder state dim mismatch");
    }
    // loc(f, t) = sum_j loc_w(f, j) * alpha_prev[t + j - center]
    Matrix loc(c.loc_filters, t_len);
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(c.loc_kernel / 2);
    for (std::size_t f = 0; f < c.loc_filters; ++f) {
        for (std::size_t t = 0; t < t_len; ++t) {
            double acc = 0.0;
            for (std::size_t j = 0; j < c.loc_kernel; ++j) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) +
                                           static_cast<std::ptrdiff_t>(j) -
                                           center;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_len)) {
                    continue;
                }
                acc += p.loc_w(f, j) * alpha_prev[static_cast<std::size_t>(src)];
            }
            loc(f, t) = acc;
        }
    }

    const Vec wu = mat_vec(p.att_w_u, u);
    Vec scores(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        const Vec wh = mat_vec(p.att_w_h, h_enc.row(t));
        double e = 0.0;
        for (std::size_t a = 0; a < c.att_dim; ++a) {
            double z = wu[a] + wh[a] + p.att_b[a];
            for (std::size_t f = 0; f < c.loc_filters; ++f) {
                z += p.att_w_f(a, f) * loc(f, t);
            }
            e += p.att_v[a] * std::tanh(z);
        }
        scores[t] = e;
    }
    return softmax(scores);
}

struct InventoryAttention {
    Vec beta;
    Vec d_bar;
};

// Cosine scores against every profile, softmax over the inventory, and the
// attention-weighted profile.
inline InventoryAttention inventory_attention(std::span<const double> q,
                                              const SpeakerInventory &inv) {
    if (inv.profiles.empty()) {
        throw ConfigError("inventory_attention: empty inventory");
    }
    if (norm(q) == 0.0) {
        throw DomainError("inventory_attention: zero-norm query");
    }
    Vec scores(inv.size());
    for (std::size_t k = 0; k < inv.size(); ++k) {
        scores[k] = cosine(q, inv.profiles[k].embedding);
    }
    InventoryAttention r;
    r.beta = softmax(scores);
    r.d_bar.assign(inv.embedding_dim(), 0.0);
    for (std::size_t k = 0; k < inv.size(); ++k) {
        const auto &d = inv.profiles[k].embedding;
        for (std::size_t i = 0; i < d.size(); ++i) {
            r.d_bar[i] += r.beta[k] * d[i];
        }
    }
    return r;
}

// One decoder step. The returned state has everything advanced except
// y_prev, which the caller sets once a token is committed.
inline StepResult decode_step(const DecoderState &state,
                              const EncodedInput &enc,
                              const SpeakerInventory &inv,
                              const ModelParams &p) {
    const auto &c = p.config;
    if (state.y_prev < 0 ||
        state.y_prev >= static_cast<TokenId>(c.vocab_size)) {
        throw ContractError("decode_step: y_prev not committed");
    }
    if (inv.embedding_dim() != c.spk_dim) {
        throw ConfigError("decode_step: profile dim " +
                          std::to_string(inv.embedding_dim()) +
                          " vs model spk dim " + std::to_string(c.spk_dim));
    }

    const auto emb = p.embedding.row(static_cast<std::size_t>(state.y_prev));

    // decoder state update from (y_prev, c_prev)
    Vec dec_in(c.emb_dim + c.enc_dim());
    std::copy(emb.begin(), emb.end(), dec_in.begin());
    std::copy(state.c_prev.begin(), state.c_prev.end(),
              dec_in.begin() + c.emb_dim);
    const CellState dec_next = cell_step(p.dec_cell, dec_in, state.dec);

    const Vec alpha = attend(dec_next.h, state.alpha_prev, enc.h_enc, p);

    // context over ASR embeddings, weighted speaker embedding
    const Vec ctx = mat_t_vec(enc.h_enc, alpha);
    const Vec p_spk = mat_t_vec(enc.h_spk, alpha);

    // speaker query update from (p_spk, y_prev)
    Vec qry_in(c.spk_dim + c.emb_dim);
    std::copy(p_spk.begin(), p_spk.end(), qry_in.begin());
    std::copy(emb.begin(), emb.end(), qry_in.begin() + c.spk_dim);
    const CellState qry_next = cell_step(p.qry_cell, qry_in, state.qry);

    const InventoryAttention ia = inventory_attention(qry_next.h, inv);

    // token distribution from c + u + W_d d_bar through the recurrent head
    Vec head_in = mat_vec(p.out_w_d, ia.d_bar);
    for (std::size_t i = 0; i < c.enc_dim(); ++i) {
        head_in[i] += ctx[i] + dec_next.h[i];
    }
    const CellState out_next = cell_step(p.out_cell, head_in, state.out);
    Vec logits = mat_vec(p.out_w, out_next.h);
    for (std::size_t v = 0; v < c.vocab_size; ++v) logits[v] += p.out_b[v];

    StepResult r;
    r.out.token_logprobs = log_softmax(logits);
    r.out.beta = ia.beta;
    r.out.alpha = alpha;
    r.out.q = qry_next.h;
    r.out.d_bar = ia.d_bar;
    r.next.dec = dec_next;
    r.next.qry = qry_next;
    r.next.out = out_next;
    r.next.c_prev = ctx;
    r.next.alpha_prev = alpha;
    r.next.y_prev = -1;
    return r;
}

// ---------------------------------------------------------------------------
// Random instantiation (for property tests and demos)
// ---------------------------------------------------------------------------

namespace detail {

template <typename Rng>
Matrix random_matrix(std::size_t rows, std::size_t cols, double scale,
                     Rng &rng) {
    std::normal_distribution<double> dist(0.0, scale);
    Matrix m(rows, cols);
    for (double &v : m.data()) v = dist(rng);
    return m;
}

template <typename Rng>
CellParams random_cell(CellKind kind, std::size_t in, std::size_t hidden,
                       Rng &rng) {
    CellParams p;
    p.kind = kind;
    const std::size_t g = (kind == CellKind::kLstm) ? 4 : 1;
    const double scale = 0.6 / std::sqrt(static_cast<double>(in + hidden));
    p.w = random_matrix(g * hidden, in, scale, rng);
    p.u = random_matrix(g * hidden, hidden, scale, rng);
    std::normal_distribution<double> dist(0.0, 0.1);
    p.b.resize(g * hidden);
    for (double &v : p.b) v = dist(rng);
    return p;
}

}  // namespace detail

inline ModelParams random_model(const ModelConfig &config,
                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto &c = config;
    const std::size_t in = c.stack_factor * c.feature_dim;
    ModelParams p;
    p.config = config;
    p.enc_fwd = detail::random_cell(c.enc_cell, in, c.enc_fwd_dim, rng);
    if (c.enc_bwd_dim > 0) {
        p.enc_bwd = detail::random_cell(c.enc_cell, in, c.enc_bwd_dim, rng);
    }
    const double conv_scale = 0.5 / std::sqrt(static_cast<double>(in));
    p.spk_conv1_w =
        detail::random_matrix(c.spk_conv_dim, in * c.spk_kernel, conv_scale, rng);
    p.spk_conv1_b.assign(c.spk_conv_dim, 0.0);
    p.spk_conv2_w = detail::random_matrix(
        c.spk_dim, c.spk_conv_dim * c.spk_kernel,
        0.5 / std::sqrt(static_cast<double>(c.spk_conv_dim)), rng);
    p.spk_conv2_b.assign(c.spk_dim, 0.0);
    p.att_w_u = detail::random_matrix(c.att_dim, c.enc_dim(), 0.3, rng);
    p.att_w_h = detail::random_matrix(c.att_dim, c.enc_dim(), 0.3, rng);
    p.att_w_f = detail::random_matrix(c.att_dim, c.loc_filters, 0.3, rng);
    p.att_b = detail::random_matrix(1, c.att_dim, 0.1, rng).data();
    p.att_v = detail::random_matrix(1, c.att_dim, 0.5, rng).data();
    p.loc_w = detail::random_matrix(c.loc_filters, c.loc_kernel, 0.3, rng);
    p.embedding = detail::random_matrix(c.vocab_size, c.emb_dim, 0.5, rng);
    p.dec_cell = detail::random_cell(c.dec_cell, c.emb_dim + c.enc_dim(),
                                     c.enc_dim(), rng);
    p.qry_cell =
        detail::random_cell(c.qry_cell, c.spk_dim + c.emb_dim, c.spk_dim, rng);
    p.out_cell = detail::random_cell(c.out_cell, c.enc_dim(), c.enc_dim(), rng);
    p.out_w_d = detail::random_matrix(c.enc_dim(), c.spk_dim, 0.3, rng);
    p.out_w = detail::random_matrix(c.vocab_size, c.enc_dim(), 0.8, rng);
    p.out_b = detail::random_matrix(1, c.vocab_size, 0.1, rng).data();
    p.validate();
    return p;
}

}  // namespace sasr
