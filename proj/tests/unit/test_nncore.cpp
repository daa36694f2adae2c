#include <doctest.h>

#include "helpers.hpp"
#include "wic/nncore/encoder.hpp"
#include "wic/nncore/gradcheck.hpp"
#include "wic/nncore/ops.hpp"
#include "wic/nncore/param_store.hpp"
#include "wic/util/errors.hpp"

using namespace wic;
using nn::Tensor2D;

namespace {

Tensor2D<double> loop_matmul(const Tensor2D<double>& a, const Tensor2D<double>& b) {
  Tensor2D<double> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

// Per-head explicit loops, no shared helpers with the library.
Tensor2D<double> loop_attention(const Tensor2D<double>& x, const nn::EncoderWeights<double>& w, std::size_t heads) {
  const std::size_t n = x.rows(), d = x.cols(), dh = d / heads;
  auto proj = [&](const Tensor2D<double>& W, const Tensor2D<double>& b) {
    Tensor2D<double> y = loop_matmul(x, W);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) y(i, j) += b(0, j);
    return y;
  };
  const auto q = proj(w.wq, w.bq), k = proj(w.wk, w.bk), v = proj(w.wv, w.bv);
  Tensor2D<double> ctx(n, d);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> s(n);
      double mx = -1e300, z = 0;
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0;
        for (std::size_t c = 0; c < dh; ++c) dot += q(i, h * dh + c) * k(j, h * dh + c);
        s[j] = dot / std::sqrt(double(dh));
        mx = std::max(mx, s[j]);
      }
      for (auto& e : s) z += (e = std::exp(e - mx));
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = 0; c < dh; ++c) ctx(i, h * dh + c) += s[j] / z * v(j, h * dh + c);
    }
  }
  Tensor2D<double> out = loop_matmul(ctx, w.wo);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out(i, j) += w.bo(0, j);
  return out;
}

nn::EncoderWeights<double> perturbed_weights(const nn::EncoderConfig& cfg, Rng& rng) {
  auto w = nn::EncoderWeights<double>::init(cfg, rng);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  w.visit([&](std::string_view, Tensor2D<double>& t) {
    for (auto& v : t.flat()) v += u(rng);
  });
  return w;
}

}  // namespace

TEST_SUITE("nncore") {
  TEST_CASE("linear: identity and zero weights") {
    const Tensor2D<double> x(1, 2, std::vector<double>{1, 2});
    const std::vector<double> zero_b{0, 0}, b{3, 4};
    const Tensor2D<double> eye(2, 2, std::vector<double>{1, 0, 0, 1}), zero(2, 2);
    CHECK(nn::linear<double>(x, eye, zero_b).values() == std::vector<double>{1, 2});
    CHECK(nn::linear<double>(x, zero, b).values() == std::vector<double>{3, 4});
  }

  TEST_CASE("linear: random case matches triple loop") {
    Rng rng(1);
    const auto x = testutil::random_tensor<double>(rng, 2, 3), W = testutil::random_tensor<double>(rng, 3, 4);
    const std::vector<double> b = testutil::random_doubles(rng, 4);
    const auto y = nn::linear<double>(x, W, b);
    const auto ref = loop_matmul(x, W);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(y(i, j) == doctest::Approx(ref(i, j) + b[j]).epsilon(1e-14));
  }

  TEST_CASE("linear: shape mismatch names both shapes") {
    const Tensor2D<double> x(1, 2), W(3, 4);
    const std::vector<double> b(4);
    try {
      nn::linear<double>(x, W, b);
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("1x2") != std::string::npos);
      CHECK(msg.find("3x4") != std::string::npos);
    }
  }

  TEST_CASE("layer norm cases") {
    const std::vector<double> g3{1, 1, 1}, b3{0, 0, 0};
    const auto y = nn::layer_norm<double>(Tensor2D<double>(1, 3, std::vector<double>{5, 5, 5}), g3, b3, 1e-5);
    for (double v : y.values()) CHECK(v == 0.0);
    const std::vector<double> g2{1, 1}, b2{0, 0};
    const auto z = nn::layer_norm<double>(Tensor2D<double>(1, 2, std::vector<double>{1, -1}), g2, b2, 1e-12);
    CHECK(z(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(z(0, 1) == doctest::Approx(-1.0).epsilon(1e-10));

    Rng rng(2);
    const auto x = testutil::random_tensor<double>(rng, 3, 7, -3, 3);
    const auto gamma = testutil::random_doubles(rng, 7), beta = testutil::random_doubles(rng, 7);
    const auto out = nn::layer_norm<double>(x, gamma, beta, 1e-5);
    for (std::size_t r = 0; r < 3; ++r) {
      double mu = 0, var = 0;
      for (std::size_t c = 0; c < 7; ++c) mu += x(r, c) / 7;
      for (std::size_t c = 0; c < 7; ++c) var += (x(r, c) - mu) * (x(r, c) - mu) / 7;
      for (std::size_t c = 0; c < 7; ++c)
        CHECK(out(r, c) == doctest::Approx((x(r, c) - mu) / std::sqrt(var + 1e-5) * gamma[c] + beta[c]).epsilon(1e-12));
    }
  }

  TEST_CASE("softmax rows") {
    const auto a = nn::softmax_rows(Tensor2D<double>(1, 2, std::vector<double>{0, 0}));
    CHECK(a.values() == std::vector<double>{0.5, 0.5});
    const auto b = nn::softmax_rows(Tensor2D<double>(1, 2, std::vector<double>{1000, 0}));
    CHECK(b.all_finite());
    CHECK(b(0, 0) == doctest::Approx(1.0));
    CHECK(b(0, 1) < 1e-300);
    Rng rng(3);
    const auto c = nn::softmax_rows(testutil::random_tensor<double>(rng, 4, 9, -20, 20));
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0;
      for (double v : c.row(r)) {
        CHECK(v >= 0);
        s += v;
      }
      CHECK(std::abs(s - 1) < 1e-12);
    }
  }

  TEST_CASE("attention: single row reduces to projected values") {
    Rng rng(4);
    nn::EncoderConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    const auto w = perturbed_weights(cfg, rng);
    const auto x = testutil::random_tensor<double>(rng, 1, 8);
    nn::AttentionCache<double> cache;
    const auto y = nn::multi_head_self_attention<double>(x, w, 2, 0.0, false, nullptr, &cache);
    for (const auto& p : cache.probs) CHECK(p(0, 0) == 1.0);
    auto v = nn::linear<double>(x, w.wv, w.bv.flat());
    const auto expect = nn::linear<double>(v, w.wo, w.bo.flat());
    for (std::size_t j = 0; j < 8; ++j) CHECK(y(0, j) == doctest::Approx(expect(0, j)).epsilon(1e-12));
  }

  TEST_CASE("attention: identical rows stay identical, random case matches loops") {
    Rng rng(5);
    nn::EncoderConfig cfg;
    cfg.dim = 8;
    cfg.heads = 4;
    const auto w = perturbed_weights(cfg, rng);
    auto x = testutil::random_tensor<double>(rng, 2, 8);
    for (std::size_t j = 0; j < 8; ++j) x(1, j) = x(0, j);
    const auto y = nn::multi_head_self_attention<double>(x, w, 4, 0.0, false, nullptr);
    for (std::size_t j = 0; j < 8; ++j) CHECK(y(0, j) == y(1, j));

    const auto x3 = testutil::random_tensor<double>(rng, 3, 8, -2, 2);
    const auto got = nn::multi_head_self_attention<double>(x3, w, 4, 0.0, false, nullptr);
    const auto ref = loop_attention(x3, w, 4);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.flat()[i] == doctest::Approx(ref.flat()[i]).epsilon(1e-12));
  }

  TEST_CASE("attention: indivisible heads rejected") {
    Rng rng(6);
    nn::EncoderConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    const auto w = nn::EncoderWeights<double>::init(cfg, rng);
    CHECK_THROWS_AS(nn::multi_head_self_attention<double>(Tensor2D<double>(2, 8), w, 3, 0.0, false, nullptr),
                    ConfigError);
  }

  TEST_CASE("encoder layer: shape and dropout-off equivalence") {
    Rng rng(7);
    nn::EncoderConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.dropout = 0.0;
    const auto w = perturbed_weights(cfg, rng);
    const auto x = testutil::random_tensor<double>(rng, 3, 8);
    Rng r1(1), r2(2);
    const auto a = nn::transformer_encoder_layer<double>(x, w, cfg, false, &r1);
    const auto b = nn::transformer_encoder_layer<double>(x, w, cfg, true, &r2);
    CHECK(a.rows() == 3);
    CHECK(a.cols() == 8);
    CHECK(a == b);
  }

  TEST_CASE("encoder layer: analytic gradients match finite differences") {
    for (std::uint64_t seed : {11u, 12u}) {
      Rng rng(seed);
      nn::EncoderConfig cfg;
      cfg.dim = 8;
      cfg.heads = 2;
      cfg.ffn_mult = 3;
      cfg.dropout = 0.2;
      auto w = perturbed_weights(cfg, rng);
      auto g = nn::EncoderWeights<double>::zeros_like(w);
      const auto x = testutil::random_tensor<double>(rng, 3, 8, -2, 2);
      const auto r = testutil::random_tensor<double>(rng, 3, 8);
      nn::ParamStore<double> ps;
      std::vector<std::pair<std::string, Tensor2D<double>*>> wv, gv;
      w.visit([&](std::string_view n, Tensor2D<double>& t) { wv.emplace_back(std::string(n), &t); });
      g.visit([&](std::string_view n, Tensor2D<double>& t) { gv.emplace_back(std::string(n), &t); });
      for (std::size_t i = 0; i < wv.size(); ++i) ps.add(wv[i].first, *wv[i].second, *gv[i].second);

      auto forward = [&](nn::EncoderCache<double>* cache) {
        Rng drop(99);
        return nn::transformer_encoder_layer<double>(x, w, cfg, true, &drop, cache);
      };
      auto loss = [&] {
        const auto y = forward(nullptr);
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) s += y.flat()[i] * r.flat()[i];
        return s;
      };
      auto grads = [&] {
        ps.zero_grad();
        nn::EncoderCache<double> cache;
        forward(&cache);
        nn::transformer_encoder_layer_backward<double>(cache, w, cfg, r, g);
      };
      const auto rep = nn::check_gradients(ps, loss, grads);
      CAPTURE(rep.worst_param);
      CHECK(rep.passed);
      CHECK(rep.max_rel_error < 1e-4);
      CHECK(rep.coords_checked == ps.num_scalars());
    }
  }

  TEST_CASE("gradient checker: linear model passes tightly, corrupted gradient fails") {
    Rng rng(8);
    auto W = testutil::random_tensor<double>(rng, 3, 2);
    Tensor2D<double> dW(3, 2);
    const auto x = testutil::random_tensor<double>(rng, 4, 3);
    const auto r = testutil::random_tensor<double>(rng, 4, 2);
    nn::ParamStore<double> ps;
    ps.add("W", W, dW);
    auto loss = [&] {
      const auto y = nn::matmul(x, W);
      double s = 0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y.flat()[i] * r.flat()[i];
      return s;
    };
    bool corrupt = false;
    auto grads = [&] {
      dW.fill(0);
      nn::matmul_tn_accumulate(x, r, dW);
      if (corrupt) dW(1, 1) += 1e-2;
    };
    nn::GradCheckOptions tight;
    tight.tol = 1e-6;
    CHECK(nn::check_gradients(ps, loss, grads, tight).passed);
    corrupt = true;
    const auto bad = nn::check_gradients(ps, loss, grads, tight);
    CHECK_FALSE(bad.passed);
    REQUIRE_FALSE(bad.failures.empty());
    CHECK(bad.failures[0].param == "W");
    CHECK(bad.failures[0].index == 3);
  }

  TEST_CASE("mean pool") {
    const Tensor2D<double> one(1, 2, std::vector<double>{4, -1});
    CHECK(nn::mean_pool(one) == std::vector<double>{4, -1});
    const Tensor2D<double> two(2, 2, std::vector<double>{1, 3, 3, 5});
    CHECK(nn::mean_pool(two) == std::vector<double>{2, 4});
    const Tensor2D<double> swapped(2, 2, std::vector<double>{3, 5, 1, 3});
    CHECK(nn::mean_pool(swapped) == nn::mean_pool(two));
    const auto back = nn::mean_pool_backward<double>(4, std::vector<double>{1, 2});
    CHECK(back.rows() == 4);
    CHECK(back(3, 1) == 0.5);
  }

  TEST_CASE("param store rejects duplicates and shape mismatches") {
    Tensor2D<double> a(2, 2), ga(2, 2), gb(1, 2);
    nn::ParamStore<double> ps;
    ps.add("a", a, ga);
    CHECK_THROWS_AS(ps.add("a", a, ga), ConfigError);
    CHECK_THROWS_AS(ps.add("b", a, gb), DimensionError);
  }
}
