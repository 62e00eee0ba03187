// Copyright 2026 The sasr Authors
// Licensed under the Apache License, Version 2.0
//
// Joint token+speaker log-probability of an attributed transcript under the
// model, evaluated by teacher forcing. This is the training criterion of the
// system expressed as a pure scoring function; it doubles as the reference
// oracle for decoding tests.

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sasr/error.hpp"
#include "sasr/model.hpp"

namespace sasr {

struct AttributedTranscript {
    std::vector<TokenId> tokens;        // ends with <eos>
    std::vector<std::size_t> speakers;  // inventory index per token

    // |Y| == |S|, terminal <eos>, and a constant speaker index inside every
    // <sc>-delimited utterance (the closing <sc>/<eos> carries the speaker
    // of the utterance it terminates).
    void validate(const Vocabulary &vocab, std::size_t inventory_size) const {
        if (tokens.size() != speakers.size()) {
            throw ContractError("AttributedTranscript: token/speaker length");
        }
        if (tokens.empty() || tokens.back() != vocab.eos_id) {
            throw ContractError("AttributedTranscript: missing terminal eos");
        }
        bool have_current = false;
        std::size_t current = 0;
        for (std::size_t n = 0; n < tokens.size(); ++n) {
            if (speakers[n] >= inventory_size) {
                throw ContractError(
                    "AttributedTranscript: speaker index out of range");
            }
            const bool separator =
                tokens[n] == vocab.sc_id || tokens[n] == vocab.eos_id;
            if (have_current && speakers[n] != current) {
                throw ContractError(
                    "AttributedTranscript: speaker changes inside utterance");
            }
            if (separator) {
                have_current = false;
            } else if (!have_current) {
                have_current = true;
                current = speakers[n];
            }
        }
    }
};

// log Pr(Y, S | X, D) with the speaker term scaled by gamma:
// sum_n [ log Pr(y_n | .) + gamma * log Pr(s_n | .) ].
inline double sa_mmi_score(const FeatureSequence &x,
                           const AttributedTranscript &t,
                           const SpeakerInventory &inv,
                           const Vocabulary &vocab, double gamma,
                           const ModelParams &params) {
    t.validate(vocab, inv.size());
    const EncodedInput enc = encode(x, params);
    DecoderState state = initial_state(params, enc.length(), vocab.sos_id);
    double score = 0.0;
    for (std::size_t n = 0; n < t.tokens.size(); ++n) {
        const StepResult r = decode_step(state, enc, inv, params);
        score += r.out.token_logprobs[static_cast<std::size_t>(t.tokens[n])];
        score += gamma * std::log(r.out.beta[t.speakers[n]]);
        state = r.next;
        state.y_prev = t.tokens[n];
    }
    return score;
}

}  // namespace sasr
