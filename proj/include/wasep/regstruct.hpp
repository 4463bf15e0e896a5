#pragma once

// Symbolic regularity structure for KPZ: decorated trees, exact homogeneities,
// the coproducts, the structure group and the renormalisation maps.

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wasep::rs {

using Rational = boost::rational<long long>;

struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// r + k*kappa, kappa a formal small parameter constrained to (0, 1/10).
struct Hom {
  Rational r{0};
  int k = 0;

  Hom operator+(const Hom& o) const { return {r + o.r, k + o.k}; }
  Hom operator-(const Hom& o) const { return {r - o.r, k - o.k}; }
  bool operator==(const Hom& o) const { return r == o.r && k == o.k; }
  bool operator!=(const Hom& o) const { return !(*this == o); }
  double at(double kappa) const;
  std::string str() const;
};

// Sign of h valid for every kappa in (0, 1/10); throws StructuralError when
// the sign changes inside that interval.
int uniform_sign(const Hom& h);
inline bool hom_less(const Hom& a, const Hom& b) { return uniform_sign(b - a) > 0; }

enum class Op { Xi, Poly, I, It, Itt, E, Prod };
// Prime is the continuous derivative; Minus/Plus are the discrete one-sided ones.
enum class Deriv { None, Prime, Minus, Plus };

struct Node;
using Sym = std::shared_ptr<const Node>;  // nullptr stands for the zero element

struct Node {
  Op op = Op::Xi;
  Deriv d = Deriv::None;
  int l0 = 0, l1 = 0;        // polynomial X^(l0,l1), time then space
  Sym arg;                   // for edges
  std::vector<Sym> factors;  // for products, sorted by key
  std::string key;
  Hom hom;
};

Sym xi();
Sym poly(int l0, int l1);
Sym one();
Sym x1();
// Integration-type edge. Returns nullptr (zero) when applied to a polynomial.
Sym edge(Op op, Deriv d, const Sym& arg);
Sym prod(const Sym& a, const Sym& b);

inline Sym I(const Sym& a) { return edge(Op::I, Deriv::None, a); }
inline Sym Ip(const Sym& a) { return edge(Op::I, Deriv::Prime, a); }

bool is_poly(const Sym& s);
bool contains_E(const Sym& s);
int noise_count(const Sym& s);

enum class Structure { Continuous, Discrete };

struct Basis {
  Structure structure = Structure::Continuous;
  std::vector<Sym> elems;  // W, sorted by homogeneity (ties by a fixed key order)
  std::vector<Sym> plus;   // W_+, same order
  std::vector<Sym> minus;  // W_-, same order (continuous only)
  std::map<std::string, int> index;
  std::map<std::string, int> plus_index;

  int size() const { return static_cast<int>(elems.size()); }
  int at(const std::string& key) const;
  // Which of the generating sets V, U, U' the element is drawn from.
  std::string set_label(int i) const;
};

// Closure of the generation rules under the homogeneity cutoffs.
Basis generate_basis(Structure s);
// Order used for the basis: homogeneity, then descending canonical key.
bool basis_order(const Sym& a, const Sym& b);

// Commutative monomial over generator keys (sorted); empty means 1.
using Mono = std::vector<std::string>;
Mono mono_mul(const Mono& a, const Mono& b);

// Formal sums in T (x) T_+ (coproducts) or T_- (x) T (negative twisting).
struct Tensor {
  struct Term {
    Rational c;
    Sym sym;
    Mono mono;
  };
  std::map<std::pair<std::string, Mono>, Term> terms;

  void add(const Rational& c, const Sym& s, const Mono& m);
  Tensor operator*(const Tensor& o) const;
  std::string str(bool mono_left) const;
};

// Delta : T -> T (x) T_+ for the continuous structure.
Tensor coproduct(const Sym& tau);
// Discrete analogue with symmetric derivative corrections.
Tensor discrete_coproduct(const Sym& tau);
// Delta_- : T -> T_- (x) T, extraction of negative subtrees (continuous).
Tensor delta_minus(const Sym& tau, const Basis& basis);

Hom mono_hom(const Mono& m, const std::map<std::string, Sym>& lookup);

// Polynomial in the character values a_1..a_n with rational coefficients.
struct Poly {
  std::map<std::vector<int>, Rational> c;

  static Poly constant(const Rational& v, int nvars);
  bool zero() const { return c.empty(); }
  void add(const Poly& o, const Rational& s = 1);
  Poly operator*(const Poly& o) const;
  double eval(const std::vector<double>& a) const;  // a[0] is f(1) = 1, unused
  std::string str() const;
};

using SymMatrix = std::vector<std::vector<Poly>>;

struct Character {
  std::vector<double> a;  // a[0] = 1, a[i] = f(i-th element of W_+)
};

// Gamma_f in the basis order: column tau holds the expansion of Gamma_f tau.
SymMatrix gamma_symbolic(const Basis& b);
Eigen::MatrixXd gamma_matrix(const Basis& b, const Character& f);
Eigen::MatrixXd eval_matrix(const SymMatrix& m, const std::vector<double>& a);
// Recover the character from a structure-group matrix using the row of 1.
Character character_from_matrix(const Basis& b, const Eigen::MatrixXd& m);

struct RenormCharacter {
  double C0 = 0, C1 = 0, C2 = 0, C3 = 0;
};
// M_g = (g (x) I) Delta_-; g(W_-) = (-C0, -C1, -C2, -C3) on the elements
// (I'(I'Xi) I'Xi, (I'Xi)^2, I'((I'Xi)^2)^2, I'(I'((I'Xi)^2) I'Xi) I'Xi).
Eigen::MatrixXd renorm_matrix(const Basis& b, const RenormCharacter& g);

// Coefficients of the characteristic polynomial, highest degree first.
std::vector<double> char_poly(const Eigen::MatrixXd& m);

}  // namespace wasep::rs
