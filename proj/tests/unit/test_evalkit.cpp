#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "wic/evalkit/analysis.hpp"
#include "wic/evalkit/metrics.hpp"
#include "wic/evalkit/tasks.hpp"
#include "wic/provider/toy_mlm.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"

using namespace wic;
using namespace wic::evalkit;

namespace {

using V = std::vector<double>;
using L = std::vector<int>;

provider::ToyMLM toy() {
  provider::ToyMLMConfig c;
  c.vocab = provider::build_vocabulary({{"the", "river", "bank", "money", "flows", "near", "a", "dog"}}, c.subword_chunk);
  return provider::ToyMLM(c);
}

}  // namespace

TEST_SUITE("evalkit") {
  TEST_CASE("threshold tuning") {
    CHECK(tune_threshold(V{0.2, 0.8}, L{0, 1}) == doctest::Approx(0.21));
    CHECK(tune_threshold(V{0.4, 0.9, 0.1}, L{1, 1, 1}) == 0.0);
    CHECK(tune_threshold(V{0.4, 0.9}, L{0, 0}) == doctest::Approx(0.91));
    CHECK(binary_accuracy(V{0.2, 0.5, 0.8}, L{0, 1, 0}, 0.5) == doctest::Approx(2.0 / 3));
    CHECK(binary_accuracy(V{0.5}, L{1}, 0.5) == 1.0);
  }

  TEST_CASE("correlations") {
    CHECK(pearson_r(V{1, 2, 3}, V{2, 4, 6}) == doctest::Approx(1.0));
    CHECK(pearson_r(V{1, 2, 3}, V{3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman_rho(V{1, 2, 3, 4}, V{1, 4, 9, 16}) == doctest::Approx(1.0));
    CHECK(fractional_ranks(V{1, 2, 2, 3}) == V{1, 2.5, 2.5, 4});
    // Ranks [1,2.5,2.5,4] against [1,3,2,4]: Pearson of the ranks.
    CHECK(spearman_rho(V{1, 2, 2, 3}, V{1, 3, 2, 4}) == doctest::Approx(0.948683298).epsilon(1e-8));
    CHECK_THROWS_AS(pearson_r(V{1, 1, 1}, V{1, 2, 3}), UndefinedStatistic);
    CHECK_THROWS_AS(spearman_rho(V{1}, V{1}), PreconditionError);
    CHECK_THROWS_AS(pearson_r(V{1, 2}, V{1, 2, 3}), PreconditionError);
  }

  TEST_CASE("cosimlex change and sts sub-corpora") {
    CHECK(cosimlex_change(0.3, 0.8) == doctest::Approx(0.5));
    const auto s = sts_score(V{1, 2, 3, 1, 2, 3, 5, 5}, V{1, 2, 3, 3, 2, 1, 1, 2},
                             {"a", "a", "a", "b", "b", "b", "c", "c"});
    CHECK(s.per_subcorpus.at("a") == doctest::Approx(1.0));
    CHECK(s.per_subcorpus.at("b") == doctest::Approx(-1.0));
    CHECK(s.corpus == doctest::Approx(0.0));
    CHECK(s.excluded == std::vector<std::string>{"c"});
  }

  TEST_CASE("buckets") {
    WordReps a{{"the", "Bank"}, {{1, 0}, {0, 1}}};
    WordReps b{{"a", "bank"}, {{1, 1}, {0, 1}}};
    WordReps c{{"x", "y"}, {{1, 0}, {1, 1}}};
    const auto self = bucketed_similarity({{a, a, true}});
    REQUIRE(self.cells[0][0].mean);
    CHECK(*self.cells[0][0].mean == doctest::Approx(1.0));
    CHECK(self.cells[0][0].count == 2);
    CHECK(self.cells[1][0].count == 2);
    CHECK_FALSE(self.cells[0][1].mean);

    const auto r = bucketed_similarity({{a, b, false}, {a, c, false}});
    CHECK(r.cells[0][1].count == 1);
    CHECK(*r.cells[0][1].mean == doctest::Approx(1.0));
    CHECK(r.cells[1][1].count == 4 + 3);
    const auto none = bucketed_similarity({{a, c, true}});
    CHECK_FALSE(none.cells[0][0].mean);
    CHECK(none.to_json().dump().find("null") != std::string::npos);
  }

  TEST_CASE("similarity of a zero vector is 0") {
    CHECK(similarity({0, 0}, {1, 2}) == 0.0);
    CHECK(similarity({1, 2}, {2, 4}) == doctest::Approx(1.0));
  }

  TEST_CASE("baseline representations") {
    const auto mlm = toy();
    const RepresentationSource src(RepKind::baseline, mlm, nullptr);
    CHECK_THROWS_AS(RepresentationSource(RepKind::meaning, mlm, nullptr), ConfigError);
    const SentenceRef s{"k", {"the", "river", "bank"}, provider::Span{2, 3}};
    const auto stack = src.encode(s);
    const auto t = src.target_rep(stack);
    CHECK(t == src.span_rep(stack, *stack.target_span));
    CHECK(t.size() == mlm.dim());

    // Sentence representation is the mean of each non-special subword on its own.
    std::vector<double> mean(mlm.dim(), 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < stack.subword_tokens.size(); ++i) {
      if (stack.special_mask[i]) continue;
      const auto r = src.span_rep(stack, {i, i + 1});
      for (std::size_t j = 0; j < r.size(); ++j) mean[j] += r[j];
      ++n;
    }
    const auto sr = src.sentence_rep(stack);
    for (std::size_t j = 0; j < sr.size(); ++j) CHECK(sr[j] == doctest::Approx(mean[j] / double(n)).epsilon(1e-5));
    CHECK(word_similarity(src, s, s) == doctest::Approx(1.0));

    const auto w = word_representations(src, s);
    CHECK(w.words == s.words);
    CHECK(w.reps.size() == 3);
  }

  TEST_CASE("layer-wise similarity shape and range") {
    const auto mlm = toy();
    auto dc = distiller::DistillerConfig::for_mode(Mode::monolingual, mlm.dim(), mlm.num_hidden_layers());
    const auto model = distiller::DistillerModel<float>::init(dc);
    std::vector<nn::Tensor2D<float>> targets;
    for (auto* w : {"bank", "dog"}) {
      const auto st = mlm.encode(w, {"the", w, "near", "a", "river"}, provider::Span{1, 2});
      targets.push_back(provider::pool_target_subwords(st));
    }
    const auto m = layerwise_similarity(model, targets, mlm.num_hidden_layers());
    CHECK(m.rows() == 3);
    CHECK(m.cols() == mlm.num_hidden_layers() + 1);
    for (double v : m.flat()) {
      CHECK(v >= -1.0 - 1e-9);
      CHECK(v <= 1.0 + 1e-9);
    }
  }

  TEST_CASE("task specs and labels") {
    const auto t = parse_task_spec("wic:data/test.tsv:data/dev.tsv");
    CHECK(t.type == "wic");
    CHECK(t.test == "data/test.tsv");
    CHECK(t.dev == std::filesystem::path("data/dev.tsv"));
    CHECK(t.name == "test");
    CHECK_FALSE(parse_task_spec("usim:u.tsv").dev);
    try {
      parse_task_spec("simlex:x.tsv");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("cosimlex-i") != std::string::npos);
    }
    CHECK(parse_binary_label("T") == 1);
    CHECK(parse_binary_label("false") == 0);
    CHECK(parse_binary_label("P") == 1);
    CHECK_THROWS_AS(parse_binary_label("maybe"), FormatError);
  }

  TEST_CASE("task files") {
    testutil::TempDir dir("tasks");
    io::write_file_atomic(dir / "w.tsv", "# comment\nthe river bank\t2\t3\ta money bank\t2\t3\tT\n\n");
    const auto w = load_word_pairs(dir / "w.tsv", "w");
    REQUIRE(w.size() == 1);
    CHECK(w[0].a.key == "w:2:1");
    CHECK(w[0].b.target == provider::Span{2, 3});
    CHECK(w[0].gold == 1.0);
    io::write_file_atomic(dir / "bad.tsv", "the river\t5\t6\tx y\t0\t1\t1\n");
    CHECK_THROWS_AS(load_word_pairs(dir / "bad.tsv", "bad"), FormatError);

    io::write_file_atomic(dir / "s.tsv", "the dog\ta dog\t3.5\tnews\n");
    const auto s = load_sentence_pairs(dir / "s.tsv", "s");
    CHECK(s[0].subcorpus == "news");
    CHECK(s[0].gold == 3.5);
  }

  TEST_CASE("baseline task report") {
    const auto mlm = toy();
    const RepresentationSource src(RepKind::baseline, mlm, nullptr);
    testutil::TempDir dir("report");
    io::write_file_atomic(dir / "t.tsv",
                          "the river bank\t2\t3\ta money bank\t2\t3\t1\n"
                          "the dog\t1\t2\tthe bank\t1\t2\t0\n"
                          "a dog\t1\t2\tthe dog\t1\t2\t1\n");
    const auto rep = run_task(parse_task_spec("wic:" + (dir / "t.tsv").string() + ":" + (dir / "t.tsv").string()), src);
    CHECK(rep["metric"] == "accuracy");
    CHECK(rep["n"] == 3);
    CHECK(rep["similarities"].size() == 3);
    CHECK(rep["value"].get<double>() >= 0.0);
  }
}
