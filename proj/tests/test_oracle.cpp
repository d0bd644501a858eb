#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "berezin/oracle.hpp"

using namespace berezin;

namespace {

RatC q(long n, long d = 1) { return RatC(rat(n, d)); }

}  // namespace

TEST_CASE("monomial norms") {
  SUBCASE("k=0: a single section of norm 2 pi") {
    auto s = Cp1Space::make(0, 0);
    REQUIRE(s.dim == 1);
    CHECK(s.norms_over_2pi[0] == rat(1));
  }

  SUBCASE("k=1: both norms pi") {
    auto s = Cp1Space::make(1, 0);
    CHECK(s.norms_over_2pi == std::vector<Rat>{rat(1, 2), rat(1, 2)});
  }

  SUBCASE("k=2: 2pi/3, pi/3, 2pi/3") {
    auto s = Cp1Space::make(2, 0);
    CHECK(s.norms_over_2pi == std::vector<Rat>{rat(1, 3), rat(1, 6), rat(1, 3)});
  }

  SUBCASE("dimension cap") {
    CHECK_THROWS_AS(Cp1Space::make(300, 0), DomainError);
  }
}

TEST_CASE("Toeplitz matrices of closed-form symbols") {
  SUBCASE("the identity symbol gives the identity matrix, exactly") {
    auto T = toeplitz_matrix(OracleSymbol::parse("1"), 5, 0);
    for (int j = 0; j < T.dim; ++j)
      for (int i = 0; i < T.dim; ++i)
        CHECK(T.entries[j][i] == (i == j ? q(1) : q(0)));
  }

  SUBCASE("h is diagonal with entries (j+1)/(k+2)") {
    auto T = toeplitz_matrix(OracleSymbol::parse("h"), 2, 0);
    CHECK(T.entries[0][0] == q(1, 4));
    CHECK(T.entries[1][1] == q(1, 2));
    CHECK(T.entries[2][2] == q(3, 4));
    CHECK(T.entries[0][1] == q(0));
  }

  SUBCASE("zred is a single band (k-i)/(k+2)") {
    int k = 5;
    auto T = toeplitz_matrix(OracleSymbol::parse("zred"), k, 0);
    for (int i = 0; i < T.dim - 1; ++i)
      CHECK(T.entries[i + 1][i] == q(k - i, k + 2));
    CHECK(T.entries[0][0] == q(0));
  }

  SUBCASE("real symbols give Hermitian matrices, exactly") {
    for (auto spec : {"h", "h2", "1,1,2:3/7;0,0,1:-2"}) {
      auto T = toeplitz_matrix(OracleSymbol::parse(spec), 7, 0);
      CHECK(T.is_hermitian_exact());
    }
    // conjugate pair of off-diagonal terms
    OracleSymbol s = OracleSymbol::parse("1,0,1:1/3;0,1,1:1/3");
    CHECK(toeplitz_matrix(s, 6, 0).is_hermitian_exact());
  }

  SUBCASE("contraction: operator norm bounded by the symbol sup") {
    for (auto spec : {"h", "zred", "1,1,2:2;0,0,2:1/2"}) {
      auto sym = OracleSymbol::parse(spec);
      for (int k : {4, 9, 16}) {
        auto T = toeplitz_matrix(sym, k, 0);
        CHECK(operator_norm(T.to_cmat()) <= sym.sup_on_grid() + 1e-9);
      }
    }
  }

  SUBCASE("conjugate symbol gives the adjoint operator, exactly") {
    // in the monomial basis the adjoint reads through the norm weights:
    // T(conj f)[j][i] q_j = conj(T(f)[i][j]) q_i
    auto f = OracleSymbol::parse("2,1,2:1/3;0,0,1:5");
    int k = 7;
    auto T = toeplitz_matrix(f, k, 0);
    auto Tc = toeplitz_matrix(f.conjugate(), k, 0);
    auto space = Cp1Space::make(k, 0);
    for (int j = 0; j < T.dim; ++j)
      for (int i = 0; i < T.dim; ++i) {
        RatC lhs = Tc.entries[j][i] * RatC(space.norms_over_2pi[j]);
        RatC rhs = T.entries[i][j].conj() * RatC(space.norms_over_2pi[i]);
        CHECK(lhs == rhs);
      }
  }

  SUBCASE("the identity projector is exactly idempotent") {
    auto T = toeplitz_matrix(OracleSymbol::parse("1"), 9, 0);
    CMat m = T.to_cmat();
    CMat diff = m * m - m;
    CHECK(max_abs_entry(diff) == 0.0);
  }

  SUBCASE("smoothness violations are rejected") {
    CHECK_THROWS_AS(OracleSymbol::parse("2,0,1"), DomainError);
  }
}

TEST_CASE("kernel values") {
  SUBCASE("diagonal value (K+1)/2pi") {
    for (int k : {3, 10}) {
      for (int aux : {0, 2}) {
        double v = bergman_kernel_value(k, aux, {0.7, 0.1}, {0.7, 0.1});
        CHECK(v == doctest::Approx((k + aux + 1) / (2 * M_PI)).epsilon(1e-12));
      }
    }
  }

  SUBCASE("k=1, z=0, w=1 gives 2^(-1/2)/pi") {
    double v = bergman_kernel_value(1, 0, {0, 0}, {1, 0});
    CHECK(v == doctest::Approx(1 / (M_PI * std::sqrt(2.0))).epsilon(1e-12));
  }

  SUBCASE("partial sums match the exact diagonal for terminating models") {
    for (int aux : {0, 2}) {
      auto m = KahlerModel::parse("fs:" + std::to_string(aux));
      BasePoint o;
      o.x = {q(0)};
      o.y = {q(0)};
      for (int k : {4, 10}) {
        auto s = bergman_partial_sum<RatC>(m, o, rat(1, 2), k);
        CHECK(s.scaled == q(k + aux + 1));
        double kernel = bergman_kernel_value(k, aux, {0, 0}, {0, 0});
        CHECK(s.value == doctest::Approx(kernel).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("product comparison") {
  SUBCASE("identity times identity has residual exactly zero") {
    auto one = OracleSymbol::parse("1");
    auto cmp = compare_product(one, one, ProductPolicy::fixed(0), {4, 8, 16}, 0);
    for (auto& row : cmp.rows) CHECK(row.residual_norm == 0.0);
  }

  SUBCASE("mid-spectrum residual has the exact closed form") {
    // (T(h)^2 - T(h^2))_jj = (j+1)(j-k-1) / ((k+2)^2 (k+3))
    auto h = OracleSymbol::parse("h");
    auto h2 = OracleSymbol::parse("h2");
    for (int k : {5, 12}) {
      auto Th = toeplitz_matrix(h, k, 0);
      auto Th2 = toeplitz_matrix(h2, k, 0);
      for (int j = 0; j <= k; ++j) {
        RatC prod(Rat(0));
        for (int i = 0; i <= k; ++i)
          prod += Th.entries[j][i] * Th.entries[i][j];
        RatC want = q(static_cast<long>(j + 1) * (j - k - 1)) /
                    q(static_cast<long>(k + 2) * (k + 2) * (k + 3));
        CHECK(prod - Th2.entries[j][j] == want);
      }
    }
  }

  SUBCASE("fixed-order slopes approach -(N+1)") {
    auto h = OracleSymbol::parse("h");
    std::vector<int> ks = {8, 12, 16, 24, 32, 48, 64};
    for (int N = 0; N <= 2; ++N) {
      auto cmp = compare_product(h, h, ProductPolicy::fixed(N), ks, 0);
      CHECK(cmp.loglog.slope == doctest::Approx(-(N + 1)).epsilon(0.3 / (N + 1)));
    }
  }

  SUBCASE("truncated-policy residuals decay exponentially or hit the floor") {
    auto h = OracleSymbol::parse("h");
    std::vector<int> ks;
    for (int k = 8; k <= 24; k += 2) ks.push_back(k);
    auto cmp = compare_product(h, h, ProductPolicy::truncated(), ks, 0, 12);
    CHECK(cmp.c_fit > 0);
    CHECK(to_double(cmp.eps) <= 0.5 + 1e-12);
    for (auto& row : cmp.rows) CHECK_FALSE(row.prefix_limited);
    CHECK(cmp.exponential.rate > 0);
    CHECK(cmp.exponential.r2 >= 0.9);
  }
}

TEST_CASE("quadrature agrees with exact entries") {
  SUBCASE("h through the Beta-weight rule") {
    bool ok = false;
    auto T = toeplitz_by_quadrature([](double t) { return t / (1 + t); }, 10, 0,
                                    64, &ok);
    CHECK(ok);
    auto E = toeplitz_matrix(OracleSymbol::parse("h"), 10, 0);
    for (int j = 0; j < T.dim; ++j)
      CHECK(to_double(T.entries[j][j].re) ==
            doctest::Approx(to_double(E.entries[j][j].re)).epsilon(1e-12));
  }

  SUBCASE("a pipeline coefficient function through the rule") {
    FsSymbolCalculus calc(0, 2);
    BiRadial h = BiRadial::monomial(1, 1, 1);
    auto hl = calc.multiplier_product(h, h, 2);
    auto exact = toeplitz_of_biradial(hl[1], 12, 0, "h_1");
    auto quad = toeplitz_by_quadrature(
        [&](double t) {
          double acc = 0;
          for (auto& [key, c] : hl[1].terms())
            acc += to_double(c.re) * std::pow(t, std::max(key.first, 0)) *
                   std::pow(1 + t, -key.second);
          return acc;
        },
        12, 0);
    for (int j = 0; j < exact.dim; ++j)
      CHECK(to_double(quad.entries[j][j].re) ==
            doctest::Approx(to_double(exact.entries[j][j].re)).epsilon(1e-10));
  }
}

TEST_CASE("covariant coefficients by extrapolation") {
  std::vector<int> ks;
  for (int k = 8; k <= 64; k += 4) ks.push_back(k);

  SUBCASE("identity symbol recovers the unit symbol exactly") {
    auto r = covariant_by_extrapolation(OracleSymbol::parse("1"), 1, ks, 0, rat(0));
    CHECK(r.estimates[0] == q(1));
    CHECK(r.estimates[1] == q(1));
  }

  SUBCASE("h at the origin gives (0, 1, -1) within 1e-6") {
    auto r = covariant_by_extrapolation(OracleSymbol::parse("h"), 2, ks, 0, rat(0));
    CHECK(abs_double(RatC(r.estimates[0] - q(0))) < 1e-6);
    CHECK(abs_double(RatC(r.estimates[1] - q(1))) < 1e-6);
    CHECK(abs_double(RatC(r.estimates[2] - q(-1))) < 1e-6);
    CHECK(r.errors[2] < 1e-5);
  }

  SUBCASE("sample values are the exact rational kernels") {
    auto r = covariant_by_extrapolation(OracleSymbol::parse("h"), 1, ks, 0, rat(0));
    for (auto& [k, u] : r.samples)
      CHECK(u == q(k + 1) / q(static_cast<long>(k) * (k + 2)));
  }

  SUBCASE("needs enough sample powers") {
    CHECK_THROWS_AS(
        covariant_by_extrapolation(OracleSymbol::parse("h"), 3, {8, 16}, 0, rat(0)),
        DomainError);
  }
}

TEST_CASE("off-diagonal decay") {
  std::vector<int> ks;
  for (int k = 8; k <= 64; k += 4) ks.push_back(k);

  SUBCASE("z=0, w=1 decays at log(2)/2 within 1 percent") {
    auto r = offdiagonal_decay_rate(q(0), q(1), 0, ks);
    CHECK(r.fit.rate == doctest::Approx(0.5 * std::log(2.0)).epsilon(0.01));
    CHECK(r.reference == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-9));
  }

  SUBCASE("diagonal pair has rate zero") {
    auto r = offdiagonal_decay_rate(q(1, 2), q(1, 2), 0, ks);
    CHECK(std::abs(r.fit.rate) < 1e-12);
  }

  SUBCASE("rate grows with chordal separation") {
    double r1 = offdiagonal_decay_rate(q(0), q(1, 2), 0, ks).fit.rate;
    double r2 = offdiagonal_decay_rate(q(0), q(1), 0, ks).fit.rate;
    double r3 = offdiagonal_decay_rate(q(0), q(2), 0, ks).fit.rate;
    CHECK(r1 < r2);
    CHECK(r2 < r3);
  }

  SUBCASE("antipodal pairs are rejected") {
    CHECK_THROWS_AS(offdiagonal_decay_rate(q(1), q(-1), 0, ks), DomainError);
  }
}
