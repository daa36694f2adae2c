#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "wic/corpus/align.hpp"
#include "wic/corpus/build.hpp"
#include "wic/corpus/embedding_table.hpp"
#include "wic/corpus/filter.hpp"
#include "wic/corpus/records.hpp"
#include "wic/provider/toy_mlm.hpp"
#include "wic/selftest/oracles.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"

using namespace wic;
using namespace wic::corpus;
using provider::MaskedPredictionSet;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

MaskedPredictionSet preds(std::vector<std::pair<std::string, double>> items) {
  MaskedPredictionSet p;
  for (auto& [t, q] : items) {
    p.tokens.push_back(t);
    p.probs.push_back(q);
  }
  p.vocab_size = p.tokens.size();
  return p;
}

EmbeddingTable table(std::vector<std::pair<std::string, std::vector<float>>> rows) {
  EmbeddingTable z;
  for (auto& [w, v] : rows) z.add(w, v);
  return z;
}

// Returns the same prediction list for any input.
struct FixedPredictor : provider::MaskedPredictor {
  MaskedPredictionSet p;
  MaskedPredictionSet predict_masked(const std::vector<std::string>&, std::size_t) const override { return p; }
};

FilterConfig mono() { return FilterConfig::for_mode(Mode::monolingual); }
FilterConfig xl() { return FilterConfig::for_mode(Mode::crosslingual); }

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("filter constants per mode") {
    const auto m = mono(), x = xl();
    CHECK(m.lambda == 0.6);
    CHECK(m.top_k == 100);
    CHECK(m.delta == 0.003);
    CHECK(m.sigma_mult == 1.0);
    CHECK(m.edit_gate == 3);
    CHECK(x.top_k == 30);
    CHECK(x.delta == 0.001);
    CHECK(x.sigma_mult == 1.282);
    CHECK(x.aligned_quantile == 0.674);
    CHECK(x.per_target_cap == 100);
    auto bad = m;
    bad.lambda = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  TEST_CASE("embedding table parsing") {
    std::istringstream with_header("1 3\nbank 0.1 0.2 0.3\n");
    const auto a = parse_embedding_table(with_header);
    CHECK(a.size() == 1);
    CHECK(a.dim() == 3);

    std::istringstream no_header("river 1 0\nbank 0 1\nbank 5 5\nbroken x y\n");
    const auto b = parse_embedding_table(no_header);
    CHECK(b.dim() == 2);
    CHECK(b.size() == 2);
    CHECK(b.duplicate_tokens == 1);
    CHECK(b.malformed_lines == 1);
    CHECK((*b.find("bank"))[0] == 0.0f);
    CHECK(b.find("Bank") == b.find("bank"));
    CHECK(b.find("lake") == nullptr);

    std::istringstream mismatch("a 1 2\nb 1 2 3\n");
    CHECK_THROWS_AS(parse_embedding_table(mismatch), FormatError);
  }

  TEST_CASE("cosine") {
    const std::vector<float> v{0.3f, -2.0f, 1.0f}, v2{0.6f, -4.0f, 2.0f}, e1{1, 0}, e2{0, 1}, z{0, 0};
    CHECK(cosine(v, v) == doctest::Approx(1.0));
    CHECK(cosine(v, v2) == doctest::Approx(1.0));
    CHECK(cosine(e1, e2) == 0.0);
    CHECK(cosine(e1, z) == 0.0);
  }

  TEST_CASE("alignment: identical sentences align word to word") {
    const auto z = table({{"red", {1, 0}}, {"car", {0, 1}}});
    const std::vector<std::string> s{"red", "car"};
    const auto a0 = mutual_argmax_align(s, 0, s, z);
    const auto a1 = mutual_argmax_align(s, 1, s, z);
    CHECK(a0.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}});
    CHECK(a1.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}});
    CHECK(a0.in_aligned(1));
    CHECK_FALSE(a0.in_aligned(0));
  }

  TEST_CASE("alignment: a word without an embedding never aligns") {
    const auto z = table({{"red", {1, 0}}, {"car", {0, 1}}});
    const std::vector<std::string> s{"red", "zzz", "car"}, sp{"zzz", "car", "red"};
    const auto a = mutual_argmax_align(s, 2, sp, z);
    CHECK(a.m[1][0] == -kInf);
    for (auto [i, j] : a.pairs) {
      CHECK(i != 1);
      CHECK(j != 0);
    }
    CHECK(a.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}});
  }

  TEST_CASE("alignment: random 3x3 matches exhaustive pairs") {
    Rng rng(1);
    for (int k = 0; k < 50; ++k) {
      oracle::Matrix m(3, std::vector<double>(3));
      for (auto& r : m)
        for (auto& v : r) v = std::uniform_int_distribution<int>(-4, 4)(rng) / 4.0;
      const auto a = mutual_argmax_align(m, k % 3);
      CHECK(std::set<std::pair<std::size_t, std::size_t>>(a.pairs.begin(), a.pairs.end()) ==
            oracle::mutual_pairs(m, k % 3));
    }
  }

  TEST_CASE("matrix statistics skip missing entries") {
    const SimilarityMatrix m = {{1, -kInf}, {3, 0}};
    const auto s = finite_stats(m);
    CHECK(s.count == 3);
    CHECK(s.mean == doctest::Approx(4.0 / 3));
    CHECK(s.stddev == doctest::Approx(std::sqrt((1.0 / 9 + 25.0 / 9 + 16.0 / 9) / 3)));
  }

  TEST_CASE("monolingual target alignment") {
    SimilarityMatrix dominant = {{0.1, 0.95, 0.0}, {0.9, 0.1, 0.1}, {0.1, 0.2, 0.8}};
    CHECK(align_target_mono(mutual_argmax_align(dominant, 0), mono()) == 1u);
    SimilarityMatrix flat(3, std::vector<double>(3, 0.5));
    CHECK_FALSE(align_target_mono(mutual_argmax_align(flat, 1), mono()));

    Rng rng(2);
    for (int k = 0; k < 100; ++k) {
      oracle::Matrix m(4, std::vector<double>(5));
      for (auto& r : m)
        for (auto& v : r) v = std::uniform_real_distribution<double>(-1, 1)(rng);
      CHECK(align_target_mono(mutual_argmax_align(m, k % 4), mono()) == oracle::align_mono(m, k % 4, 1.0));
    }
  }

  TEST_CASE("crosslingual target alignment") {
    // Target row 0; rows 1-2 align strongly to columns 1-2.
    SimilarityMatrix ok = {{0.95, 0.1, 0.0}, {0.1, 0.9, 0.0}, {0.0, 0.1, 0.88}};
    CHECK(align_target_xl(mutual_argmax_align(ok, 0), xl()) == 0u);
    // Column 0 clears the spread but sits far under the aligned pairs.
    SimilarityMatrix low = {{0.3, -0.9, -0.9, -0.9}, {-0.9, 0.99, -0.9, -0.9}, {-0.9, -0.9, 0.98, -0.9},
                            {-0.9, -0.9, -0.9, 0.97}};
    const auto a = mutual_argmax_align(low, 0);
    CHECK(a.pairs.size() == 3);
    CHECK(align_target_mono(a, mono()) == 0u);
    CHECK_FALSE(align_target_xl(a, xl()));
  }

  TEST_CASE("edit distance") {
    CHECK(edit_distance("cat", "cat") == 0);
    CHECK(edit_distance("cat", "cut") == 1);
    CHECK(edit_distance("", "abc") == 3);
    CHECK(edit_distance("café", "cafe") == 1);
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
      std::string a, b;
      for (int i = std::uniform_int_distribution<int>(0, 7)(rng); i > 0; --i) a += char('a' + rng() % 3);
      for (int i = std::uniform_int_distribution<int>(0, 7)(rng); i > 0; --i) b += char('a' + rng() % 3);
      CHECK(edit_distance(a, b) == oracle::levenshtein(a, b));
    }
  }

  TEST_CASE("top candidates: cut at k, then at delta") {
    auto cfg = mono();
    cfg.top_k = 3;
    const auto c = top_candidates(preds({{"b", 0.002}, {"a", 0.5}, {"d", 0.05}, {"c", 0.4}}), cfg);
    REQUIRE(c.size() == 3);
    CHECK(c[0].token == "a");
    CHECK(c[2].token == "d");
    const auto d = top_candidates(preds({{"a", 0.5}, {"b", 0.002}, {"c", 0.4}}), cfg);
    REQUIRE(d.size() == 2);
    CHECK(d[1].token == "c");
  }

  TEST_CASE("monolingual negative") {
    const auto z = table({{"bank", {1, 0}}, {"shore", {0.9f, 0.1f}}, {"loan", {0, 1}}, {"edge", {0.6f, 0.8f}}});
    auto cfg = mono();
    CHECK(select_negative_mono(preds({{"Bank", 0.5}, {"loan", 0.3}}), "bank", z, cfg) == "loan");
    CHECK(select_negative_mono(preds({{"shore", 0.5}, {".", 0.2}, {"loan", 0.1}}), "bank", z, cfg) == "loan");
    CHECK_FALSE(select_negative_mono(preds({{"shore", 0.5}, {"unknown", 0.4}}), "bank", z, cfg));
    cfg.lambda = cosine(*z.find("edge"), *z.find("bank"));
    CHECK_FALSE(select_negative_mono(preds({{"edge", 0.9}}), "bank", z, cfg));
  }

  TEST_CASE("positive enhancement") {
    const auto z = table({{"big", {1, 0}}, {"large", {0.95f, 0.05f}}, {"bigger", {0.9f, 0.2f}}, {"tiny", {-1, 0}}});
    const auto cfg = mono();
    CHECK(enhancement_gate("big", "bigs", cfg));
    CHECK_FALSE(enhancement_gate("walk", "stroll", cfg));
    CHECK(edit_distance("bank", "tree") == 4);
    CHECK_FALSE(enhancement_gate("bank", "tree", cfg));
    CHECK(enhance_positive_mono(preds({{"big", 0.5}, {"bigger", 0.2}, {"large", 0.2}}), "big", "big", z, cfg) ==
          "large");
    CHECK_FALSE(enhance_positive_mono(preds({{"tiny", 0.9}}), "big", "big", z, cfg));
  }

  TEST_CASE("crosslingual negative") {
    const auto z = table({{"bank", {1, 0, 0}}, {"banco", {0.95f, 0.1f, 0}}, {"rio", {0, 1, 0}},
                          {"orilla", {0.5f, 0.5f, 0.2f}}, {"mesa", {0, 0, 1}}});
    const auto cfg = xl();
    CHECK_FALSE(select_negative_xl(preds({{"rio", 0.9}}), "bank", "banco", z, cfg));
    CHECK(select_negative_xl(preds({{"banco", 0.5}, {"rio", 0.3}, {"mesa", 0.1}}), "bank", "banco", z, cfg) == "rio");
    CHECK(select_negative_xl(preds({{"banco", 0.5}, {"orilla", 0.3}, {"mesa", 0.1}}), "bank", "banco", z, cfg) ==
          "mesa");
    CHECK_FALSE(select_negative_xl(preds({{"rio", 0.5}}), "bank", "missing", z, cfg));
  }

  TEST_CASE("records: pair parsing and triple round trip") {
    const auto p = parse_pair(R"({"src_tokens":["a","b"],"tgt_tokens":["c"],"lang_src":"en","lang_tgt":"en","target_index":1})");
    CHECK(p.src_tokens.size() == 2);
    CHECK(p.target_index == 1u);
    CHECK_THROWS_AS(parse_pair(R"({"src_tokens":["a"],"tgt_tokens":["c"],"target_index":4})"), FormatError);
    CHECK_THROWS_AS(parse_pair("{not json"), FormatError);
    CHECK_THROWS_AS(parse_pair(R"({"src_tokens":"a b"})"), FormatError);

    TrainingTriple t;
    t.id = "t000001";
    t.mode = Mode::crosslingual;
    t.language_pair = "en-xx";
    t.original = {{"the", "bank"}, 1, "en"};
    t.positive = {{"zeva", "kabe"}, 1, "xx"};
    t.negative = {{"zeva", "rio"}, 1, "xx"};
    CHECK(triple_from_json(nlohmann::json::parse(to_json(t).dump())) == t);

    testutil::TempDir dir("records");
    io::write_file_atomic(dir / "t.jsonl", triples_to_jsonl({t}) + "garbage\n\n" + triples_to_jsonl({t}));
    const auto f = read_triples(dir / "t.jsonl");
    CHECK(f.triples.size() == 2);
    CHECK(f.skipped == 1);
  }

  TEST_CASE("validation split size") {
    CHECK(validation_count(0, 0.01) == 0);
    CHECK(validation_count(1, 0.01) == 0);
    CHECK(validation_count(2, 0.01) == 1);
    CHECK(validation_count(1000, 0.01) == 10);
    CHECK(validation_count(10, 0.99) == 9);
    CHECK(validation_count(10, 0.0) == 0);
  }

  TEST_CASE("corpus build: empty input and alignment failures") {
    FixedPredictor pred;
    const auto z = table({{"red", {1, 0}}, {"car", {0, 1}}});
    std::istringstream empty("");
    const auto e = build_corpus(empty, pred, z, mono());
    CHECK(e.train.empty());
    CHECK(e.validation.empty());
    CHECK(e.stats.to_json() == CorpusStats{}.to_json());

    std::istringstream one(R"({"src_tokens":["red","car"],"tgt_tokens":["zzz","yyy"],"target_index":0})" "\n"
                           "not json\n");
    const auto r = build_corpus(one, pred, z, mono());
    CHECK(r.stats.lines_read == 2);
    CHECK(r.stats.unreadable == 1);
    CHECK(r.stats.no_alignment == 1);
    CHECK(r.stats.emitted == 0);
  }

  TEST_CASE("corpus build: triple count matches a per-pair oracle trace") {
    Rng rng(4);
    std::vector<std::string> words;
    EmbeddingTable z;
    for (int i = 0; i < 12; ++i) {
      words.push_back("w" + std::to_string(i));
      if (i < 10) {
        std::vector<float> v(4);
        for (auto& x : v) x = float(std::normal_distribution<double>()(rng));
        z.add(words.back(), v);
      }
    }
    FixedPredictor pred;
    pred.p = preds({{"w3", 0.4}, {"w7", 0.3}, {"w1", 0.2}, {"w11", 0.1}});
    const auto cfg = mono();
    std::ostringstream lines;
    std::size_t expected = 0, expected_no_align = 0, expected_no_neg = 0;
    for (int k = 0; k < 20; ++k) {
      std::vector<std::string> s, sp;
      for (int i = 0; i < 5; ++i) s.push_back(words[rng() % words.size()]);
      for (int i = 0; i < 5; ++i) sp.push_back(words[rng() % words.size()]);
      const std::size_t t = k % 5;
      nlohmann::json j = {{"src_tokens", s}, {"tgt_tokens", sp}, {"target_index", t}};
      lines << j.dump() << "\n";

      oracle::Matrix m(5, std::vector<double>(5, -kInf));
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t c = 0; c < 5; ++c)
          if (z.find(s[i]) && z.find(sp[c])) m[i][c] = oracle::cos(*z.find(s[i]), *z.find(sp[c]));
      const auto p = oracle::align_mono(m, t, cfg.sigma_mult);
      if (!p) {
        ++expected_no_align;
        continue;
      }
      if (oracle::negative_mono(pred.p, s[t], z, cfg)) {
        ++expected;
      } else {
        ++expected_no_neg;
      }
    }
    std::istringstream in(lines.str());
    const auto r = build_corpus(in, pred, z, cfg);
    CHECK(expected > 0);
    CHECK(expected_no_align > 0);
    CHECK(r.stats.emitted == expected);
    CHECK(r.stats.no_alignment == expected_no_align);
    CHECK(r.stats.no_negative == expected_no_neg);
    CHECK(r.train.size() + r.validation.size() == expected);
    for (const auto& t : r.train) {
      CHECK(t.negative.tokens.size() == t.original.tokens.size());
      CHECK(t.negative.tokens[t.negative.target_index] != t.original.tokens[t.original.target_index]);
    }
  }

  TEST_CASE("corpus build is independent of thread count and respects the cap") {
    const auto fixture = std::filesystem::path(WIC_FIXTURE_DIR);
    const auto z = load_embedding_table(fixture / "embeddings.txt");
    provider::ToyMLMConfig mc;
    std::vector<std::string> vocab;
    for (auto& l : io::read_lines(fixture / "vocab.txt"))
      if (!l.empty()) vocab.push_back(l);
    mc.vocab = provider::build_vocabulary({vocab}, mc.subword_chunk);
    const provider::ToyMLM mlm(mc);
    auto cfg = xl();
    cfg.seed = 3;
    const auto text = io::read_file(fixture / "pairs.jsonl");
    std::istringstream a(text), b(text);
    const auto r1 = build_corpus(a, mlm, z, cfg, 1);
    const auto r4 = build_corpus(b, mlm, z, cfg, 4);
    CHECK(r1.train == r4.train);
    CHECK(r1.validation == r4.validation);
    CHECK(r1.stats.emitted > 50);

    cfg.per_target_cap = 2;
    std::istringstream c(text);
    const auto capped = build_corpus(c, mlm, z, cfg, 2);
    std::map<std::string, int> per_target;
    for (const auto* part : std::array{&capped.train, &capped.validation})
      for (const auto& t : *part) ++per_target[t.original.tokens[t.original.target_index]];
    for (const auto& [w, n] : per_target) CHECK(n <= 2);
    CHECK(capped.stats.cap > 0);
    CHECK(capped.stats.emitted + capped.stats.cap == r1.stats.emitted);
  }
}
