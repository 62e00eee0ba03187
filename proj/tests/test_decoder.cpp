// Copyright 2026 The sasr Authors
// Licensed under the Apache License, Version 2.0

#include <cmath>
#include <map>
#include <random>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "sasr/decoder.hpp"
#include "test_util.hpp"

using namespace sasr;
using Catch::Matchers::WithinAbs;

namespace {

ModelConfig beam_config(std::size_t vocab) {
    ModelConfig c;
    c.feature_dim = 3;
    c.stack_factor = 3;
    c.enc_fwd_dim = 3;
    c.enc_bwd_dim = 0;
    c.spk_dim = 3;
    c.spk_conv_dim = 2;
    c.emb_dim = 2;
    c.att_dim = 3;
    c.vocab_size = vocab;
    return c;
}

class UniformScorer : public ExternalScorer {
  public:
    UniformScorer(std::size_t vocab, double w) : vocab_(vocab), w_(w) {}
    Vec score_next(std::span<const TokenId> /*history*/) const override {
        return Vec(vocab_, -std::log(static_cast<double>(vocab_)));
    }
    double weight() const override { return w_; }

  private:
    std::size_t vocab_;
    double w_;
};

// Exhaustive reference decoder: every sequence over the non-start alphabet
// up to max_len, truncated at the first eos, scored by the token term.
struct BruteForceResult {
    std::vector<TokenId> tokens;
    double score;
};

BruteForceResult brute_force_best(const EncodedInput &enc,
                                  const SpeakerInventory &inv,
                                  const Vocabulary &vocab,
                                  std::size_t max_len,
                                  const ModelParams &params) {
    std::map<std::vector<TokenId>, double> scored;
    std::vector<TokenId> alphabet;
    for (TokenId v = 0; v < static_cast<TokenId>(vocab.size()); ++v) {
        if (v != vocab.sos_id) alphabet.push_back(v);
    }
    const std::size_t a = alphabet.size();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < max_len; ++i) combos *= a;

    for (std::size_t code = 0; code < combos; ++code) {
        std::vector<TokenId> seq;
        std::size_t rem = code;
        for (std::size_t i = 0; i < max_len; ++i) {
            seq.push_back(alphabet[rem % a]);
            rem /= a;
        }
        auto state = initial_state(params, enc.length(), vocab.sos_id);
        double score = 0.0;
        std::vector<TokenId> truncated;
        for (TokenId tok : seq) {
            auto r = decode_step(state, enc, inv, params);
            score += r.out.token_logprobs[static_cast<std::size_t>(tok)];
            truncated.push_back(tok);
            if (tok == vocab.eos_id) break;
            state = r.next;
            state.y_prev = tok;
        }
        auto it = scored.find(truncated);
        if (it == scored.end()) scored.emplace(truncated, score);
    }
    BruteForceResult best{{}, -1e300};
    for (const auto &[seq, score] : scored) {
        if (score > best.score) best = {seq, score};
    }
    return best;
}

Hypothesis make_hypothesis(const std::vector<TokenId> &tokens,
                           const std::vector<Vec> &betas, std::size_t t_len,
                           std::size_t spk_dim) {
    Hypothesis h;
    h.tokens = tokens;
    h.betas = betas;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        h.queries.push_back(Vec(spk_dim, 0.1 * (i + 1)));
        h.alphas.push_back(Vec(t_len, 1.0 / t_len));
    }
    return h;
}

}  // namespace

TEST_CASE("exhaustive beam equals brute-force enumeration") {
    std::mt19937_64 seeds(2024);
    auto vocab = testutil::make_vocab(1);  // V = 4
    for (int trial = 0; trial < 5; ++trial) {
        auto params = random_model(beam_config(vocab.size()), seeds());
        auto x = testutil::random_features(9, 3, seeds());
        auto inv = testutil::random_inventory(2, params.config.spk_dim, seeds());
        auto enc = encode(x, params);

        auto best = brute_force_best(enc, inv, vocab, 3, params);

        DecodeConfig cfg;
        cfg.beam_width = 64;  // > 3^3 candidates, nothing pruned
        cfg.max_len = 3;
        auto ranked = beam_search(enc, inv, vocab, cfg, {}, params);
        REQUIRE(!ranked.empty());
        CHECK(ranked.front().tokens == best.tokens);
        CHECK_THAT(ranked.front().log_score, WithinAbs(best.score, 1e-9));
    }
}

TEST_CASE("uniform fusion scorer does not change the ranking") {
    auto vocab = testutil::make_vocab(2);
    auto params = random_model(beam_config(vocab.size()), 77);
    auto x = testutil::random_features(12, 3, 78);
    auto inv = testutil::random_inventory(2, params.config.spk_dim, 79);
    auto enc = encode(x, params);

    DecodeConfig cfg;
    cfg.beam_width = 4;
    cfg.max_len = 4;
    auto plain = beam_search(enc, inv, vocab, cfg, {}, params);

    UniformScorer scorer(vocab.size(), 0.3);
    auto fused = beam_search(enc, inv, vocab, cfg, {&scorer}, params);

    REQUIRE(plain.size() == fused.size());
    for (std::size_t i = 0; i < plain.size(); ++i) {
        CHECK(plain[i].tokens == fused[i].tokens);
    }
}

TEST_CASE("beam width one is greedy decoding") {
    auto vocab = testutil::make_vocab(2);
    auto params = random_model(beam_config(vocab.size()), 91);
    auto x = testutil::random_features(12, 3, 92);
    auto inv = testutil::random_inventory(2, params.config.spk_dim, 93);
    auto enc = encode(x, params);

    std::vector<TokenId> greedy;
    {
        auto state = initial_state(params, enc.length(), vocab.sos_id);
        for (std::size_t n = 0; n < 5; ++n) {
            auto r = decode_step(state, enc, inv, params);
            TokenId best = -1;
            double best_lp = -1e300;
            for (TokenId v = 0; v < static_cast<TokenId>(vocab.size()); ++v) {
                if (v == vocab.sos_id) continue;
                if (r.out.token_logprobs[v] > best_lp) {
                    best_lp = r.out.token_logprobs[v];
                    best = v;
                }
            }
            greedy.push_back(best);
            if (best == vocab.eos_id) break;
            state = r.next;
            state.y_prev = best;
        }
    }

    DecodeConfig cfg;
    cfg.beam_width = 1;
    cfg.max_len = 5;
    auto ranked = beam_search(enc, inv, vocab, cfg, {}, params);
    REQUIRE(!ranked.empty());
    CHECK(ranked.front().tokens == greedy);
}

TEST_CASE("top score is non-decreasing in beam width") {
    std::mt19937_64 seeds(555);
    auto vocab = testutil::make_vocab(3);
    for (int trial = 0; trial < 5; ++trial) {
        auto params = random_model(beam_config(vocab.size()), seeds());
        auto x = testutil::random_features(12, 3, seeds());
        auto inv = testutil::random_inventory(2, params.config.spk_dim, seeds());
        auto enc = encode(x, params);
        double prev = -1e300;
        for (std::size_t width : {1u, 2u, 4u, 8u}) {
            DecodeConfig cfg;
            cfg.beam_width = width;
            cfg.max_len = 4;
            auto ranked = beam_search(enc, inv, vocab, cfg, {}, params);
            REQUIRE(!ranked.empty());
            CHECK(ranked.front().log_score >= prev - 1e-12);
            prev = ranked.front().log_score;
        }
    }
}

TEST_CASE("hypotheses that never emit eos are force-terminated") {
    auto vocab = testutil::make_vocab(2);
    auto params = random_model(beam_config(vocab.size()), 101);
    params.out_b[vocab.eos_id] = -200.0;  // eos effectively impossible
    auto x = testutil::random_features(12, 3, 102);
    auto inv = testutil::random_inventory(2, params.config.spk_dim, 103);
    auto enc = encode(x, params);

    DecodeConfig cfg;
    cfg.beam_width = 2;
    cfg.max_len = 4;
    auto ranked = beam_search(enc, inv, vocab, cfg, {}, params);
    REQUIRE(!ranked.empty());
    CHECK(ranked.front().forced);
    CHECK(ranked.front().tokens.size() == 4);
}

TEST_CASE("split assigns each utterance the posterior argmax at its close") {
    auto vocab = testutil::make_vocab(3);  // content ids 3,4,5
    auto inv = testutil::random_inventory(3, 2, 111);

    // tokens: a b <sc> c </s>; peak k=2 at the <sc>, k=0 at the </s>
    std::vector<Vec> betas = {
        {0.5, 0.3, 0.2}, {0.5, 0.3, 0.2}, {0.1, 0.2, 0.7},
        {0.4, 0.3, 0.3}, {0.6, 0.2, 0.2},
    };
    auto h = make_hypothesis({3, 4, vocab.sc_id, 5, vocab.eos_id}, betas, 4, 2);

    auto r = split_utterances(h, inv, vocab);
    REQUIRE(r.utterances.size() == 2);
    CHECK(r.dropped_empty == 0);
    CHECK(r.utterances[0].tokens == std::vector<TokenId>{3, 4});
    CHECK(r.utterances[0].speaker_index == 2);
    CHECK(r.utterances[0].speaker_label == "spk2");
    CHECK(r.utterances[0].alpha_rows.size() == 2);
    CHECK(r.utterances[0].query == h.queries[2]);
    CHECK(r.utterances[1].tokens == std::vector<TokenId>{5});
    CHECK(r.utterances[1].speaker_index == 0);
    CHECK(r.utterances[1].query == h.queries[4]);

    // d_bar at the close is the beta-weighted profile
    for (std::size_t j = 0; j < 2; ++j) {
        double expect = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            expect += betas[2][k] * inv.profiles[k].embedding[j];
        }
        CHECK_THAT(r.utterances[0].d_bar[j], WithinAbs(expect, 1e-12));
    }
}

TEST_CASE("split without sc yields one utterance from the eos posterior") {
    auto vocab = testutil::make_vocab(3);
    auto inv = testutil::random_inventory(2, 2, 121);
    std::vector<Vec> betas = {{0.9, 0.1}, {0.2, 0.8}};
    auto h = make_hypothesis({4, vocab.eos_id}, betas, 3, 2);
    auto r = split_utterances(h, inv, vocab);
    REQUIRE(r.utterances.size() == 1);
    CHECK(r.utterances[0].speaker_index == 1);
}

TEST_CASE("beta ties break to the lowest profile index") {
    auto vocab = testutil::make_vocab(3);
    auto inv = testutil::random_inventory(3, 2, 131);
    std::vector<Vec> betas = {{0.4, 0.4, 0.2}, {0.4, 0.4, 0.2}};
    auto h = make_hypothesis({3, vocab.eos_id}, betas, 3, 2);
    auto r = split_utterances(h, inv, vocab);
    REQUIRE(r.utterances.size() == 1);
    CHECK(r.utterances[0].speaker_index == 0);
}

TEST_CASE("empty utterances between separators are dropped and counted") {
    auto vocab = testutil::make_vocab(3);
    auto inv = testutil::random_inventory(2, 2, 141);
    std::vector<Vec> betas(5, Vec{0.7, 0.3});
    auto h = make_hypothesis({3, vocab.sc_id, vocab.sc_id, 4, vocab.eos_id},
                             betas, 3, 2);
    auto r = split_utterances(h, inv, vocab);
    CHECK(r.utterances.size() == 2);
    CHECK(r.dropped_empty == 1);
}

TEST_CASE("split requires eos unless forced") {
    auto vocab = testutil::make_vocab(3);
    auto inv = testutil::random_inventory(2, 2, 151);
    std::vector<Vec> betas(2, Vec{0.7, 0.3});
    auto h = make_hypothesis({3, 4}, betas, 3, 2);
    CHECK_THROWS_AS(split_utterances(h, inv, vocab), ContractError);
    h.forced = true;
    auto r = split_utterances(h, inv, vocab);
    REQUIRE(r.utterances.size() == 1);
    CHECK(r.utterances[0].tokens == std::vector<TokenId>{3, 4});
}

TEST_CASE("merge concatenates per speaker preserving order") {
    UtteranceHypothesis x, y, z;
    x.tokens = {10};
    x.speaker_label = "A";
    y.tokens = {11};
    y.speaker_label = "B";
    z.tokens = {12};
    z.speaker_label = "A";

    auto merged = merge_same_speaker({x, y, z});
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].speaker_label == "A");
    CHECK(merged[0].tokens == std::vector<TokenId>{10, 12});
    CHECK(merged[1].speaker_label == "B");

    auto distinct = merge_same_speaker({x, y});
    CHECK(distinct.size() == 2);

    UtteranceHypothesis z2 = z;
    z2.tokens = {13};
    auto all_same = merge_same_speaker({x, z, z2});
    REQUIRE(all_same.size() == 1);
    CHECK(all_same[0].tokens == std::vector<TokenId>{10, 12, 13});
}

TEST_CASE("split then merge conserves the content token multiset") {
    std::mt19937_64 seeds(909);
    auto vocab = testutil::make_vocab(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto params = random_model(beam_config(vocab.size()), seeds());
        auto x = testutil::random_features(15, 3, seeds());
        auto inv = testutil::random_inventory(3, params.config.spk_dim, seeds());
        auto enc = encode(x, params);
        DecodeConfig cfg;
        cfg.beam_width = 3;
        cfg.max_len = 8;
        auto ranked = beam_search(enc, inv, vocab, cfg, {}, params);
        REQUIRE(!ranked.empty());
        const auto &h = ranked.front();

        std::multiset<TokenId> original;
        for (TokenId t : h.tokens) {
            if (t != vocab.sc_id && t != vocab.eos_id) original.insert(t);
        }
        auto split = split_utterances(h, inv, vocab);
        auto merged = merge_same_speaker(split.utterances);
        std::multiset<TokenId> after;
        for (const auto &u : merged) {
            for (TokenId t : u.tokens) after.insert(t);
        }
        CHECK(original == after);
    }
}
