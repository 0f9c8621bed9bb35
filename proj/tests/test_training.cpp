#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fd_check.hpp"
#include "hanforge/training.hpp"

using namespace hanforge;
using namespace hanforge::training;

namespace {

Tensor probs2(double p0) {
    Tensor t = Tensor::vector(2);
    t[0] = p0;
    t[1] = 1.0 - p0;
    return t;
}

encoders::HyperParams tiny_hyper() {
    encoders::HyperParams h;
    h.embedding_dim = 8;
    h.hidden_size = 4;
    h.dropout_rate = 0.5;
    h.max_words_per_sentence = 16;
    h.max_sentences_per_doc = 8;
    return h;
}

}  // namespace

TEST_CASE("weighted_cross_entropy closed forms") {
    auto even = weighted_cross_entropy(probs2(0.5), 0, {1.0, 1.0});
    CHECK(even.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK_FALSE(even.clamped);

    // clamp path: probability exactly zero at the label stays finite
    auto clamped = weighted_cross_entropy(probs2(1.0), 1, {1.0, 1.0});
    CHECK(std::isfinite(clamped.loss));
    CHECK(clamped.loss == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
    CHECK(clamped.clamped);

    // doubling the class weight doubles loss and gradient exactly
    auto w1 = weighted_cross_entropy(probs2(0.3), 1, {1.0, 1.0});
    auto w2 = weighted_cross_entropy(probs2(0.3), 1, {1.0, 2.0});
    CHECK(w2.loss == 2.0 * w1.loss);
    CHECK(w2.d_logits[0] == 2.0 * w1.d_logits[0]);
    CHECK(w2.d_logits[1] == 2.0 * w1.d_logits[1]);

    // gradient w.r.t. logits is w * (p - onehot)
    auto g = weighted_cross_entropy(probs2(0.3), 1, {1.0, 1.5});
    CHECK(g.d_logits[0] == doctest::Approx(1.5 * 0.3).epsilon(1e-12));
    CHECK(g.d_logits[1] == doctest::Approx(1.5 * (0.7 - 1.0)).epsilon(1e-12));
}

TEST_CASE("loss scales linearly with a common class-weight factor") {
    RngState rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        double p = 0.05 + 0.9 * rng.next_unit();
        int label = rng.next_below(2) ? 1 : 0;
        double w0 = 0.5 + rng.next_unit(), w1 = 0.5 + rng.next_unit();
        double k = 0.25 + 3.0 * rng.next_unit();
        auto base = weighted_cross_entropy(probs2(p), label, {w0, w1});
        auto scaled = weighted_cross_entropy(probs2(p), label, {k * w0, k * w1});
        CHECK(std::abs(scaled.loss - k * base.loss) < 1e-12 * std::max(1.0, std::abs(k * base.loss)));
    }
}

TEST_CASE("auto_class_weights balanced and reference counts") {
    std::vector<int> balanced = {0, 1, 0, 1};
    auto w = auto_class_weights(balanced);
    CHECK(w.weights[0] == 1.0);
    CHECK(w.weights[1] == 1.0);

    // the 95,295 / 34,524 split
    std::vector<int> labels;
    labels.insert(labels.end(), 95295, 0);
    labels.insert(labels.end(), 34524, 1);
    auto ref = auto_class_weights(labels);
    CHECK(ref.weights[0] == doctest::Approx(0.681).epsilon(1e-3));
    CHECK(ref.weights[1] == doctest::Approx(1.880).epsilon(1e-3));

    // weighted counts equalize: w0 N0 == w1 N1, exactly in rationals and
    // bitwise in doubles for these counts
    CHECK(ref.num[0] * 95295 * ref.den[1] == ref.num[1] * 34524 * ref.den[0]);
    CHECK(ref.weights[0] * 95295 == ref.weights[1] * 34524);

    CHECK_THROWS_AS(auto_class_weights(std::vector<int>{1, 1}), DomainError);
}

TEST_CASE("adam first step and zero-gradient behaviour") {
    encoders::HyperParams hyper = tiny_hyper();
    RngState rng(1);
    auto model = encoders::init_model(encoders::Variant::v1, hyper, 6, rng);
    auto params = encoders::parameter_refs(model);
    AdamState adam = adam_init(params, 1e-3);

    // zero gradients: parameters and moments unchanged
    auto grads = encoders::grads_like(model);
    auto grad_refs = encoders::gradient_refs(grads, model);
    Tensor before = *params[1].tensor;
    adam_update(adam, params, grad_refs);
    CHECK(*params[1].tensor == before);
    for (const Tensor& m : adam.m)
        for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] == 0.0);

    // first step with g = 1 everywhere: delta = -lr / (1 + eps)
    AdamState fresh = adam_init(params, 1e-3);
    for (auto& ref : grad_refs) ref.tensor->fill(1.0);
    std::vector<Tensor> prior;
    for (auto& ref : params) prior.push_back(*ref.tensor);
    adam_update(fresh, params, grad_refs);
    double expected_delta = -1e-3 / (1.0 + 1e-8);
    for (std::size_t k = 0; k < params.size(); ++k)
        for (std::size_t i = 0; i < params[k].tensor->size(); ++i) {
            double delta = (*params[k].tensor)[i] - prior[k][i];
            CHECK(delta == doctest::Approx(expected_delta).epsilon(1e-12));
            CHECK(std::abs(delta + 1e-3) < 1e-9);  // bias correction cancels
        }

    // NaN gradients abort naming the tensor
    (*grad_refs[2].tensor)[0] = std::nan("");
    try {
        adam_update(fresh, params, grad_refs);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find(grad_refs[2].name) != std::string::npos);
    }
}

TEST_CASE("one adam step on a quadratic moves toward the minimum") {
    // loss = 0.5 (x - target)^2, gradient = x - target
    RngState rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        double x0 = rng.next_uniform(-5, 5);
        double target = rng.next_uniform(-5, 5);
        if (std::abs(x0 - target) < 1e-9) continue;

        encoders::HanModel shim;  // adam works over named tensor lists; make one
        shim.classifier.weights = Tensor::matrix(1, 1);
        shim.classifier.weights[0] = x0;

        std::vector<encoders::NamedTensorRef> params = {{"x", &shim.classifier.weights}};
        AdamState adam = adam_init(params, 1e-2);
        Tensor g = Tensor::matrix(1, 1);
        g[0] = x0 - target;
        std::vector<encoders::NamedTensorRef> grads = {{"x", &g}};
        adam_update(adam, params, grads);
        double x1 = shim.classifier.weights[0];
        CHECK(std::abs(x1 - target) < std::abs(x0 - target));  // moved toward the minimum
        CHECK((x1 - x0) * (target - x0) > 0);                  // and in the right direction
    }
}

TEST_CASE("adam state sidecar round trip") {
    encoders::HyperParams hyper = tiny_hyper();
    RngState rng(2);
    auto model = encoders::init_model(encoders::Variant::v1, hyper, 6, rng);
    auto params = encoders::parameter_refs(model);
    AdamState adam = adam_init(params, 5e-4);
    adam.step = 17;
    adam.m[0][0] = 0.25;
    adam.v[3][1] = 1.5e-7;

    std::string j = train_state_to_json(adam, 4, 99);
    std::size_t epoch = 0;
    std::uint64_t seed = 0;
    AdamState back = train_state_from_json(j, &epoch, &seed);
    CHECK(epoch == 4);
    CHECK(seed == 99);
    CHECK(back.step == 17);
    CHECK(back.lr == 5e-4);
    REQUIRE(back.names.size() == adam.names.size());
    for (std::size_t k = 0; k < adam.names.size(); ++k) {
        CHECK(back.names[k] == adam.names[k]);
        CHECK(back.m[k] == adam.m[k]);
        CHECK(back.v[k] == adam.v[k]);
    }
}

TEST_CASE("synthetic corpus construction invariants") {
    auto corpus = make_synthetic_corpus(300, 0.3, 7);
    CHECK(corpus.train.size() == 200);
    CHECK(corpus.test.size() == 100);

    const auto& triggers = synthetic_trigger_tokens();
    std::set<std::string> trigger_set(triggers.begin(), triggers.end());
    auto contains_trigger = [&trigger_set](const data::Article& a) {
        for (const std::string& sent : data::split_sentences(a.title + " " + a.text))
            for (const std::string& tok : data::tokenize_words(sent))
                if (trigger_set.count(tok)) return true;
        return false;
    };

    std::size_t unreliable = 0;
    std::set<std::string> uids;
    for (const auto& split : {corpus.train, corpus.test}) {
        for (const auto& a : split) {
            CHECK(uids.insert(a.uid).second);
            if (a.label == 1) {
                ++unreliable;
                CHECK(contains_trigger(a));
            } else {
                CHECK_FALSE(contains_trigger(a));
            }
        }
    }
    double ratio = static_cast<double>(unreliable) / 300.0;
    CHECK(std::abs(ratio - 0.3) < 0.02);

    // determinism
    auto again = make_synthetic_corpus(300, 0.3, 7);
    REQUIRE(again.train.size() == corpus.train.size());
    for (std::size_t i = 0; i < corpus.train.size(); ++i) {
        CHECK(again.train[i].uid == corpus.train[i].uid);
        CHECK(again.train[i].title == corpus.train[i].title);
        CHECK(again.train[i].text == corpus.train[i].text);
        CHECK(again.train[i].label == corpus.train[i].label);
    }

    // title placement puts every trigger in the title
    SynthOptions topt;
    topt.placement = TriggerPlacement::title;
    auto titled = make_synthetic_corpus(60, 0.5, 3, topt);
    for (const auto& a : titled.train) {
        if (a.label != 1) continue;
        bool in_title = false;
        for (const std::string& tok : data::tokenize_words(a.title))
            if (trigger_set.count(tok)) in_title = true;
        CHECK(in_title);
    }

    CHECK_THROWS_AS(make_synthetic_corpus(10, 0.3, 1), DomainError);
}

TEST_CASE("train epochs=0 returns an empty report and leaves the model unchanged") {
    auto corpus = make_synthetic_corpus(30, 0.3, 11, {0.0, TriggerPlacement::mixed});
    auto vocab = data::build_vocab(corpus.train);
    encoders::HyperParams hyper = tiny_hyper();
    RngState rng(4);
    auto model = encoders::init_model(encoders::Variant::v1, hyper, vocab.size(), rng);
    Tensor before = model.classifier.weights;

    TrainConfig tc;
    tc.epochs = 0;
    auto tokenized = data::tokenize_articles(corpus.train, vocab, hyper);
    auto report = train(model, tokenized, {}, tc);
    CHECK(report.epochs.empty());
    CHECK(model.classifier.weights == before);
}

TEST_CASE("first-epoch loss on balanced random labels is near ln 2") {
    // random labels, no signal: chance-level loss
    auto corpus = make_synthetic_corpus(80, 0.5, 13, {0.0, TriggerPlacement::mixed});
    RngState label_rng(21);
    for (auto& a : corpus.train) a.label = label_rng.next_below(2) ? 1 : 0;
    int ones = 0;
    for (auto& a : corpus.train) ones += a.label;
    // rebalance exactly
    for (auto& a : corpus.train) {
        if (ones > 40 && a.label == 1) { a.label = 0; --ones; }
        if (ones < 40 && a.label == 0) { a.label = 1; ++ones; }
    }

    auto vocab = data::build_vocab(corpus.train);
    encoders::HyperParams hyper = tiny_hyper();
    RngState rng(5);
    auto model = encoders::init_model(encoders::Variant::v1, hyper, vocab.size(), rng);

    TrainConfig tc;
    tc.epochs = 1;
    tc.seed = 5;
    auto tokenized = data::tokenize_articles(corpus.train, vocab, hyper);
    auto report = train(model, tokenized, {}, tc);
    REQUIRE(report.epochs.size() == 1);
    CHECK(report.epochs[0].train_loss == doctest::Approx(std::log(2.0)).epsilon(0.15));
}

TEST_CASE("mean-over-batch gradient equals the single-article gradient on identical articles") {
    auto corpus = make_synthetic_corpus(24, 0.5, 17, {0.0, TriggerPlacement::mixed});
    auto vocab = data::build_vocab(corpus.train);
    encoders::HyperParams hyper = tiny_hyper();
    hyper.dropout_rate = 0.0;  // isolate the averaging arithmetic
    RngState rng(6);
    auto model = encoders::init_model(encoders::Variant::v1, hyper, vocab.size(), rng);

    auto tok = data::tokenize_article(corpus.train[0], vocab, hyper);

    auto one_grad = [&](std::size_t copies) {
        encoders::ModelGradients grads = encoders::grads_like(model);
        for (std::size_t i = 0; i < copies; ++i) {
            encoders::ArticleCache cache;
            layers::DenseCache dense_cache;
            auto enc = encoders::encode_article(model, tok.title_ids, tok.body_ids, &cache);
            Tensor probs = encoders::classify(model, enc.vec, &dense_cache);
            auto ce = weighted_cross_entropy(probs, tok.label, {1.0, 1.0});
            encoders::model_backward_into(model, cache, dense_cache, ce.d_logits, grads);
        }
        encoders::scale_gradients(grads, 1.0 / static_cast<double>(copies));
        return grads;
    };

    auto single = one_grad(1);
    auto batch = one_grad(5);
    auto srefs = encoders::gradient_refs(single, model);
    auto brefs = encoders::gradient_refs(batch, model);
    for (std::size_t k = 0; k < srefs.size(); ++k)
        for (std::size_t i = 0; i < srefs[k].tensor->size(); ++i)
            CHECK(std::abs((*srefs[k].tensor)[i] - (*brefs[k].tensor)[i]) < 1e-12);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
    auto corpus = make_synthetic_corpus(40, 0.3, 19, {0.0, TriggerPlacement::mixed});
    auto vocab = data::build_vocab(corpus.train);
    encoders::HyperParams hyper = tiny_hyper();

    auto run = [&]() {
        RngState rng(7);
        auto model = encoders::init_model(encoders::Variant::v1, hyper, vocab.size(), rng);
        TrainConfig tc;
        tc.epochs = 3;
        tc.seed = 7;
        tc.batch_size = 8;
        auto tokenized = data::tokenize_articles(corpus.train, vocab, hyper);
        auto report = train(model, tokenized, tokenized, tc);
        return std::make_pair(std::move(model), std::move(report));
    };

    auto [m1, r1] = run();
    auto [m2, r2] = run();
    auto refs1 = encoders::parameter_refs(m1);
    auto refs2 = encoders::parameter_refs(m2);
    for (std::size_t k = 0; k < refs1.size(); ++k) CHECK(*refs1[k].tensor == *refs2[k].tensor);
    REQUIRE(r1.epochs.size() == r2.epochs.size());
    for (std::size_t e = 0; e < r1.epochs.size(); ++e) {
        CHECK(r1.epochs[e].train_loss == r2.epochs[e].train_loss);
        CHECK(r1.epochs[e].val_roc_auc == r2.epochs[e].val_roc_auc);
    }
}

TEST_CASE("separable synthetic corpus trains to high accuracy at tiny dimensions") {
    // desk-scale smoke version of the overfit criterion: small model, small corpus
    auto corpus = make_synthetic_corpus(60, 0.4, 23, {0.0, TriggerPlacement::mixed});
    auto vocab = data::build_vocab(corpus.train);
    encoders::HyperParams hyper = tiny_hyper();
    RngState rng(8);
    auto model = encoders::init_model(encoders::Variant::v1, hyper, vocab.size(), rng);

    TrainConfig tc;
    tc.epochs = 40;
    tc.seed = 8;
    tc.batch_size = 8;
    tc.early_stop_patience = 0;
    tc.target_train_accuracy = 0.99;
    auto tokenized = data::tokenize_articles(corpus.train, vocab, hyper);
    auto report = train(model, tokenized, {}, tc);
    REQUIRE(!report.epochs.empty());
    double best = 0;
    for (const auto& e : report.epochs) best = std::max(best, e.train_accuracy);
    CHECK(best >= 0.99);

    // the PAD embedding row is still exactly zero after training
    for (std::size_t c = 0; c < model.embedding.dim(); ++c)
        CHECK(model.embedding.weights.at(0, c) == 0.0);
}

TEST_CASE("score_articles spans the corpus and stays within [0, 1]") {
    auto corpus = make_synthetic_corpus(30, 0.3, 29, {0.0, TriggerPlacement::mixed});
    auto vocab = data::build_vocab(corpus.train);
    encoders::HyperParams hyper = tiny_hyper();
    RngState rng(9);
    auto model = encoders::init_model(encoders::Variant::v2, hyper, vocab.size(), rng);
    auto tokenized = data::tokenize_articles(corpus.train, vocab, hyper);
    auto scores = score_articles(model, tokenized);
    CHECK(scores.size() == tokenized.size());
    for (double s : scores) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}
