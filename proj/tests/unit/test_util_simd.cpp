#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "wic/simd/kernels.hpp"
#include "wic/util/errors.hpp"
#include "wic/util/io.hpp"
#include "wic/util/text.hpp"

using namespace wic;

TEST_SUITE("util") {
  TEST_CASE("lowercase and case-insensitive equality") {
    CHECK(text::lower("BaNK") == "bank");
    CHECK(text::iequals("River", "rIVER"));
    CHECK_FALSE(text::iequals("river", "rivers"));
  }

  TEST_CASE("punctuation and numerals") {
    for (const char* t : {".", ",", "!?", "--", "42", "3.5", "1,000", "-7"}) CHECK_MESSAGE(text::is_punct_or_numeral(t), t);
    for (const char* t : {"bank", "x1", "3d", "état"}) CHECK_MESSAGE(!text::is_punct_or_numeral(t), t);
  }

  TEST_CASE("code points split multi-byte characters whole") {
    const auto cps = text::codepoints("aé猫");
    REQUIRE(cps.size() == 3);
    CHECK(cps[1] == "é");
    CHECK(cps[2] == "猫");
  }

  TEST_CASE("split helpers") {
    CHECK(text::split_ws("  a  b\tc ") == std::vector<std::string>{"a", "b", "c"});
    CHECK(text::split("a\t\tb", '\t') == std::vector<std::string>{"a", "", "b"});
    CHECK(text::join({"x", "y"}, "-") == "x-y");
  }

  TEST_CASE("atomic write leaves no temp file behind") {
    testutil::TempDir dir("io");
    io::write_file_atomic(dir / "f.txt", "hello");
    io::write_file_atomic(dir / "f.txt", "again");
    CHECK(io::read_file(dir / "f.txt") == "again");
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir.path)) n += e.is_regular_file();
    CHECK(n == 1);
  }

  TEST_CASE("little-endian float round trip") {
    const std::vector<float> v = {0.0f, -1.5f, 3.25e-7f, 1e30f};
    std::string bytes;
    io::append_f32_le(bytes, v);
    REQUIRE(bytes.size() == 16);
    CHECK(static_cast<unsigned char>(bytes[7]) == 0xBF);  // -1.5f = 0xBFC00000
    std::vector<float> back(4);
    io::read_f32_le(bytes, back);
    CHECK(back == v);
  }

  TEST_CASE("split_rng streams are independent and reproducible") {
    auto a = split_rng(5, "x"), b = split_rng(5, "x"), c = split_rng(5, "y");
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
  }
}

TEST_SUITE("simd") {
  TEST_CASE("every available backend agrees with the scalar kernels") {
    Rng rng(17);
    const auto& ref = simd::kernels_for(simd::Backend::scalar);
    for (auto be : {simd::Backend::scalar, simd::Backend::avx2, simd::Backend::neon}) {
      if (!simd::backend_available(be)) continue;
      CAPTURE(simd::backend_name(be));
      const auto& k = simd::kernels_for(be);
      for (std::size_t n = 0; n < 70; ++n) {
        CAPTURE(n);
        const auto xd = testutil::random_doubles(rng, n, -2, 2), yd = testutil::random_doubles(rng, n, -2, 2);
        std::vector<float> xf(xd.begin(), xd.end()), yf(yd.begin(), yd.end());
        double abs_sum = 0;
        for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(xd[i] * yd[i]);

        CHECK(std::abs(k.dot_f64(xd.data(), yd.data(), n) - ref.dot_f64(xd.data(), yd.data(), n)) <=
              1e-14 * (abs_sum + 1));
        CHECK(std::abs(double(k.dot_f32(xf.data(), yf.data(), n)) - double(ref.dot_f32(xf.data(), yf.data(), n))) <=
              1e-5 * (abs_sum + 1));

        auto y1 = yd, y2 = yd;
        k.axpy_f64(0.37, xd.data(), y1.data(), n);
        ref.axpy_f64(0.37, xd.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
        auto f1 = yf, f2 = yf;
        k.axpy_f32(-1.25f, xf.data(), f1.data(), n);
        ref.axpy_f32(-1.25f, xf.data(), f2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(f1[i] == doctest::Approx(f2[i]).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("backend can be switched at runtime") {
    const auto before = simd::active_backend();
    simd::set_backend(simd::Backend::scalar);
    CHECK(simd::active_backend() == simd::Backend::scalar);
    const double a[3] = {1, 2, 3}, b[3] = {4, 5, 6};
    CHECK(simd::dot(a, b, 3) == 32.0);
    simd::set_backend(before);
    CHECK(simd::active_backend() == before);
  }

  TEST_CASE("unavailable backend is refused") {
    for (auto be : {simd::Backend::avx2, simd::Backend::neon}) {
      if (!simd::backend_available(be)) CHECK_THROWS(simd::set_backend(be));
    }
  }
}
