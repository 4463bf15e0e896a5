#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "regstruct_tables.hpp"
#include "wasep/regstruct.hpp"

using namespace wasep::rs;

using namespace rs_ref;

TEST_CASE("homogeneity sign is decided uniformly on the kappa window") {
  CHECK(uniform_sign(h(1, 2, -5)) == 1);
  CHECK(uniform_sign(h(0, 1, -2)) == -1);
  CHECK(uniform_sign(h(0, 1, 0)) == 0);
  CHECK_THROWS_AS(uniform_sign(h(1, 20, -1)), StructuralError);
}

TEST_CASE("continuous basis matches the hand-built trees and their homogeneities") {
  Basis b = generate_basis(Structure::Continuous);
  Trees T;
  REQUIRE(b.size() == 16);
  const auto expected = expected_homs();
  for (int i = 1; i <= 16; ++i) {
    CAPTURE(i);
    CHECK(b.elems[i - 1]->key == T.t[i]->key);
    CHECK(b.elems[i - 1]->hom == expected[i - 1]);
    CHECK(T.t[i]->hom == expected[i - 1]);
  }
  CHECK(b.plus.size() == 8);
  CHECK(b.minus.size() == 4);
  std::vector<std::string> plus{T.t[9]->key,  T.t[10]->key, T.t[11]->key, T.t[12]->key,
                                T.t[13]->key, T.t[14]->key, T.t[15]->key, T.t[16]->key};
  for (std::size_t i = 0; i < plus.size(); ++i) CHECK(b.plus[i]->key == plus[i]);
  std::vector<std::string> minus{T.t[2]->key, T.t[5]->key, T.t[6]->key, T.t[8]->key};
  for (std::size_t i = 0; i < minus.size(); ++i) CHECK(b.minus[i]->key == minus[i]);
}

TEST_CASE("coproduct reproduces the table of Delta") {
  Basis b = generate_basis(Structure::Continuous);
  Trees T;
  const auto table = coproduct_table(T);

  for (const auto& [i, expect] : table) {
    CAPTURE(i);
    Tensor got = coproduct(T.t[i]);
    INFO(got.str(false));
    CHECK(same(got, expect));
  }
}

TEST_CASE("every coproduct term preserves the grading") {
  for (Structure st : {Structure::Continuous, Structure::Discrete}) {
    Basis b = generate_basis(st);
    std::map<std::string, Sym> lookup;
    for (const Sym& s : b.elems) lookup[s->key] = s;
    for (const Sym& s : b.elems) {
      Tensor t = st == Structure::Continuous ? coproduct(s) : discrete_coproduct(s);
      for (const auto& [k, term] : t.terms) {
        CAPTURE(s->key);
        CAPTURE(term.sym->key);
        Hom right = mono_hom(term.mono, lookup);
        CHECK(term.sym->hom + right == s->hom);
        CHECK(uniform_sign(right) >= 0);
        CHECK(b.index.count(term.sym->key) == 1);
      }
    }
  }
}

TEST_CASE("Gamma_f reproduces the structure-group matrix, including composite entries") {
  Basis b = generate_basis(Structure::Continuous);
  Trees T;
  SymMatrix m = gamma_symbolic(b);
  const auto expect = gamma_expected();
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      CAPTURE(i + 1);
      CAPTURE(j + 1);
      CHECK(m[i][j].c == expect[i][j].c);
    }
  CHECK(m[8][14].str() == "a6 + a1a5");
}

TEST_CASE("structure group: zero character, closure and unipotency") {
  Basis b = generate_basis(Structure::Continuous);
  SymMatrix sm = gamma_symbolic(b);
  Character zero{std::vector<double>(8, 0.0)};
  zero.a[0] = 1;
  CHECK((gamma_matrix(b, zero) - Eigen::MatrixXd::Identity(16, 16)).norm() == 0.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2, 2);
  double worst = 0, worst_poly = 0;
  const double binom[17] = {1,    -16,  120,   -560, 1820, -4368, 8008, -11440, 12870,
                            -11440, 8008, -4368, 1820, -560, 120,   -16,  1};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> fa(8), ga(8);
    fa[0] = ga[0] = 1;
    for (int i = 1; i < 8; ++i) {
      fa[i] = U(rng);
      ga[i] = U(rng);
    }
    Eigen::MatrixXd F = eval_matrix(sm, fa), G = eval_matrix(sm, ga), P = F * G;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        if (sm[i][j].zero()) REQUIRE(P(i, j) == 0.0);
    Character hc = character_from_matrix(b, P);
    Eigen::MatrixXd H = eval_matrix(sm, hc.a);
    worst = std::max(worst, (H - P).cwiseAbs().maxCoeff());
    auto c = char_poly(P);
    for (int k = 0; k <= 16; ++k) worst_poly = std::max(worst_poly, std::abs(c[k] - binom[k]) / std::abs(binom[k]));
  }
  CHECK(worst < 1e-12);
  CHECK(worst_poly < 1e-12);
}

TEST_CASE("triangularity of Gamma with respect to homogeneity") {
  Basis b = generate_basis(Structure::Continuous);
  SymMatrix sm = gamma_symbolic(b);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (i != j && !sm[i][j].zero()) CHECK(hom_less(b.elems[i]->hom, b.elems[j]->hom));
}

TEST_CASE("negative twisting reproduces the table of Delta_-") {
  Basis b = generate_basis(Structure::Continuous);
  Trees T;
  const auto table = delta_minus_table(T);

  for (const auto& [i, expect] : table) {
    CAPTURE(i);
    Tensor got = delta_minus(T.t[i], b);
    INFO(got.str(true));
    CHECK(same(got, expect));
    for (const auto& [key, term] : got.terms) {
      Hom left;
      for (const auto& m : term.mono) left = left + b.elems[b.at(m)]->hom;
      CHECK(left + term.sym->hom == T.t[i]->hom);
    }
  }
}

TEST_CASE("renormalisation map") {
  Basis b = generate_basis(Structure::Continuous);
  Trees T;
  CHECK((renorm_matrix(b, {}) - Eigen::MatrixXd::Identity(16, 16)).norm() == 0.0);
  RenormCharacter g{0.0, 1.5, -0.25, 2.0};
  Eigen::MatrixXd M = renorm_matrix(b, g);
  const int unit = b.at(one()->key);
  CHECK(M(unit, b.at(T.t[2]->key)) == -1.5);
  CHECK(M(unit, b.at(T.t[5]->key)) == 0.25);
  CHECK(M(unit, b.at(T.t[6]->key)) == -2.0);
  Eigen::MatrixXd off = M - Eigen::MatrixXd::Identity(16, 16);
  CHECK(off.cwiseAbs().sum() == doctest::Approx(1.5 + 0.25 + 2.0));

  RenormCharacter g0{0.7, 1.5, -0.25, 2.0};
  Eigen::MatrixXd M0 = renorm_matrix(b, g0);
  CHECK(M0(b.at(T.t[4]->key), b.at(T.t[3]->key)) == doctest::Approx(-1.4));
  CHECK(M0(b.at(T.t[8]->key), b.at(T.t[6]->key)) == doctest::Approx(-1.4));
  CHECK(M0(b.at(T.t[7]->key), b.at(T.t[6]->key)) == doctest::Approx(-0.7));
  auto c = char_poly(M0);
  CHECK(c[16] == doctest::Approx(1.0));
  CHECK(c[1] == doctest::Approx(-16.0));

  // conjugated structure group keeps its triangular pattern
  SymMatrix sm = gamma_symbolic(b);
  std::vector<double> a{1, 0.3, -1.1, 0.7, 2.0, -0.4, 0.9, 1.3};
  Eigen::MatrixXd C = M0.inverse() * eval_matrix(sm, a) * M0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (std::abs(C(i, j)) > 1e-12 && i != j) CHECK(hom_less(b.elems[i]->hom, b.elems[j]->hom));
}

TEST_CASE("discrete structure counts and E-symbol homogeneities") {
  Basis b = generate_basis(Structure::Discrete);
  CHECK(b.size() == 48);
  CHECK(b.plus.size() == 25);
  std::map<std::string, int> e_homs;
  for (const Sym& s : b.elems)
    if (contains_E(s)) e_homs[s->hom.str()] += 1;
  int total = 0;
  for (auto& [k, v] : e_homs) total += v;
  CHECK(total == 5);
  CHECK(e_homs["-2k"] == 2);
  CHECK(e_homs["1/2-k"] == 2);
  CHECK(e_homs["3/2-k"] == 1);
}

TEST_CASE("discrete coproduct of Xi and of an E-symbol") {
  Sym X = xi();
  CHECK(discrete_coproduct(X).str(false) == "Xi (x) 1");
  Sym inner = edge(Op::Itt, Deriv::Plus, edge(Op::I, Deriv::Minus, X));
  Sym e = edge(Op::E, Deriv::None, inner);
  Tensor t = discrete_coproduct(e);
  Sym em = edge(Op::E, Deriv::Minus, inner);
  bool has_correction = false;
  for (const auto& [k, term] : t.terms)
    if (term.sym->key == "X1" && term.mono == Mono{em->key}) has_correction = true;
  CHECK(has_correction);
}
