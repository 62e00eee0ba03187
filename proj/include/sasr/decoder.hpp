// Copyright 2026 The sasr Authors
// Licensed under the Apache License, Version 2.0
//
// Extended beam search: hypotheses carry per-step speaker posteriors and
// query vectors alongside tokens, utterances are split at <sc>, the speaker
// of each utterance is read from the posterior at its closing <sc>/<eos>
// step, and same-speaker utterances can be concatenated. External scorers
// hook in by shallow fusion (weighted sum of log scores).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sasr/error.hpp"
#include "sasr/model.hpp"

namespace sasr {

struct Hypothesis {
    std::vector<TokenId> tokens;
    double log_score = 0.0;
    std::vector<Vec> betas;    // one per step
    std::vector<Vec> queries;  // one per step
    std::vector<Vec> alphas;   // one per step
    DecoderState state;
    bool forced = false;  // terminated by max_len instead of <eos>
};

class ExternalScorer {
  public:
    virtual ~ExternalScorer() = default;
    // log-domain scores over the vocabulary given the emitted history
    virtual Vec score_next(std::span<const TokenId> history) const = 0;
    virtual double weight() const = 0;
};

struct DecodeConfig {
    std::size_t beam_width = 4;
    std::size_t max_len = 64;
    // Adds gamma * log(max_k beta) to the beam score at every step. Off by
    // default: the hypothesis score is the token posterior, with the speaker
    // posterior used only for speaker selection.
    bool include_speaker_term = false;
    double gamma = 0.1;
    double length_penalty = 0.0;  // added per emitted token when ranking
};

namespace detail {

inline double ranking_score(const Hypothesis &h, const DecodeConfig &cfg) {
    return h.log_score +
           cfg.length_penalty * static_cast<double>(h.tokens.size());
}

}  // namespace detail

inline std::vector<Hypothesis> beam_search(
    const EncodedInput &enc, const SpeakerInventory &inv,
    const Vocabulary &vocab, const DecodeConfig &cfg,
    const std::vector<const ExternalScorer *> &scorers,
    const ModelParams &params) {
    if (cfg.beam_width < 1 || cfg.max_len < 1) {
        throw ContractError("beam_search: beam_width and max_len must be >= 1");
    }
    const std::size_t v_size = params.config.vocab_size;

    Hypothesis root;
    root.state = initial_state(params, enc.length(), vocab.sos_id);
    std::vector<Hypothesis> live = {root};
    std::vector<Hypothesis> finished;

    auto by_rank = [&](const Hypothesis &a, const Hypothesis &b) {
        return detail::ranking_score(a, cfg) > detail::ranking_score(b, cfg);
    };

    for (std::size_t step = 0; step < cfg.max_len && !live.empty(); ++step) {
        std::vector<Hypothesis> candidates;
        candidates.reserve(live.size() * v_size);
        for (const Hypothesis &h : live) {
            const StepResult r = decode_step(h.state, enc, inv, params);
            Vec combined = r.out.token_logprobs;
            for (const ExternalScorer *s : scorers) {
                const Vec ext = s->score_next(h.tokens);
                if (ext.size() != v_size) {
                    throw DimensionError("external scorer vocab size mismatch");
                }
                const double w = s->weight();
                for (std::size_t v = 0; v < v_size; ++v) {
                    combined[v] += w * ext[v];
                }
            }
            double speaker_term = 0.0;
            if (cfg.include_speaker_term) {
                const double top =
                    *std::max_element(r.out.beta.begin(), r.out.beta.end());
                speaker_term = cfg.gamma * std::log(top);
            }
            for (std::size_t v = 0; v < v_size; ++v) {
                if (static_cast<TokenId>(v) == vocab.sos_id) continue;
                Hypothesis c = h;
                c.tokens.push_back(static_cast<TokenId>(v));
                c.log_score += combined[v] + speaker_term;
                c.betas.push_back(r.out.beta);
                c.queries.push_back(r.out.q);
                c.alphas.push_back(r.out.alpha);
                c.state = r.next;
                c.state.y_prev = static_cast<TokenId>(v);
                candidates.push_back(std::move(c));
            }
        }
        std::stable_sort(candidates.begin(), candidates.end(), by_rank);

        // Only the top beam_width candidates survive; terminated ones take
        // a beam slot and move to the finished pool.
        live.clear();
        const std::size_t keep = std::min(cfg.beam_width, candidates.size());
        for (std::size_t i = 0; i < keep; ++i) {
            Hypothesis &c = candidates[i];
            if (c.tokens.back() == vocab.eos_id) {
                finished.push_back(std::move(c));
            } else {
                live.push_back(std::move(c));
            }
        }
    }

    for (Hypothesis &h : live) {
        h.forced = true;
        finished.push_back(std::move(h));
    }
    std::stable_sort(finished.begin(), finished.end(), by_rank);
    if (finished.size() > cfg.beam_width) finished.resize(cfg.beam_width);
    return finished;
}

// ---------------------------------------------------------------------------
// Utterance grouping
// ---------------------------------------------------------------------------

struct UtteranceHypothesis {
    std::vector<TokenId> tokens;  // content tokens only
    std::string speaker_label;
    std::size_t speaker_index = 0;  // argmax posterior at the closing step
    Vec query;                      // speaker query at the closing step
    Vec d_bar;                      // weighted profile at the closing step
    std::vector<Vec> alpha_rows;    // attention rows of the content tokens
    bool has_times = false;
    double start_seconds = 0.0;
    double end_seconds = 0.0;
};

struct SplitResult {
    std::vector<UtteranceHypothesis> utterances;
    std::size_t dropped_empty = 0;
};

namespace detail {

inline std::size_t argmax_lowest(const Vec &v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;  // ties keep the lowest index
    }
    return best;
}

inline Vec weighted_profile(const Vec &beta, const SpeakerInventory &inv) {
    Vec d(inv.embedding_dim(), 0.0);
    for (std::size_t k = 0; k < inv.size(); ++k) {
        for (std::size_t j = 0; j < d.size(); ++j) {
            d[j] += beta[k] * inv.profiles[k].embedding[j];
        }
    }
    return d;
}

}  // namespace detail

// Partition a hypothesis at <sc> into utterances; each utterance's speaker
// is the posterior argmax at its closing <sc>/<eos> step. Empty utterances
// between consecutive separators are dropped and counted.
inline SplitResult split_utterances(const Hypothesis &h,
                                    const SpeakerInventory &inv,
                                    const Vocabulary &vocab) {
    if (h.tokens.empty()) {
        return {};
    }
    if (!h.forced && h.tokens.back() != vocab.eos_id) {
        throw ContractError(
            "split_utterances: hypothesis does not end with eos "
            "and is not flagged as forced");
    }
    SplitResult result;
    std::vector<TokenId> content;
    std::vector<Vec> rows;
    auto close = [&](std::size_t step) {
        if (content.empty()) {
            ++result.dropped_empty;
            return;
        }
        UtteranceHypothesis u;
        u.tokens = std::move(content);
        u.speaker_index = detail::argmax_lowest(h.betas[step]);
        u.speaker_label = inv.profiles[u.speaker_index].speaker_id;
        u.query = h.queries[step];
        u.d_bar = detail::weighted_profile(h.betas[step], inv);
        u.alpha_rows = std::move(rows);
        result.utterances.push_back(std::move(u));
        content.clear();
        rows.clear();
    };
    for (std::size_t n = 0; n < h.tokens.size(); ++n) {
        const TokenId t = h.tokens[n];
        if (t == vocab.sc_id || t == vocab.eos_id) {
            close(n);
        } else {
            content.push_back(t);
            rows.push_back(h.alphas[n]);
        }
    }
    if (!content.empty()) {
        close(h.tokens.size() - 1);  // forced hypothesis without terminator
    }
    return result;
}

// Concatenate utterances sharing a speaker label, preserving the original
// utterance order; the merged query is the one from the last constituent
// (its closing step is the merged utterance's closing step).
inline std::vector<UtteranceHypothesis> merge_same_speaker(
    const std::vector<UtteranceHypothesis> &utterances) {
    std::vector<UtteranceHypothesis> merged;
    for (const auto &u : utterances) {
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const UtteranceHypothesis &m) {
                                   return m.speaker_label == u.speaker_label;
                               });
        if (it == merged.end()) {
            merged.push_back(u);
            continue;
        }
        it->tokens.insert(it->tokens.end(), u.tokens.begin(), u.tokens.end());
        it->alpha_rows.insert(it->alpha_rows.end(), u.alpha_rows.begin(),
                              u.alpha_rows.end());
        it->query = u.query;
        it->d_bar = u.d_bar;
        it->speaker_index = u.speaker_index;
        if (it->has_times && u.has_times) {
            it->start_seconds = std::min(it->start_seconds, u.start_seconds);
            it->end_seconds = std::max(it->end_seconds, u.end_seconds);
        } else if (u.has_times) {
            it->has_times = true;
            it->start_seconds = u.start_seconds;
            it->end_seconds = u.end_seconds;
        }
    }
    return merged;
}

}  // namespace sasr
