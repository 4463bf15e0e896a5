#include "wasep/regstruct.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace wasep::rs {

namespace {

const Rational kKappaMax(1, 10);

int sgn(const Rational& v) { return v.numerator() > 0 ? 1 : (v.numerator() < 0 ? -1 : 0); }
int sgn(int v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

std::string poly_key(int l0, int l1) {
  if (l0 == 0 && l1 == 0) return "1";
  if (l0 == 0 && l1 == 1) return "X1";
  return "X^(" + std::to_string(l0) + "," + std::to_string(l1) + ")";
}

std::string op_prefix(Op op) {
  switch (op) {
    case Op::I: return "I";
    case Op::It: return "It";
    case Op::Itt: return "Itt";
    case Op::E: return "E";
    default: throw StructuralError("not an edge operator");
  }
}

std::string deriv_suffix(Deriv d) {
  switch (d) {
    case Deriv::None: return "";
    case Deriv::Prime: return "'";
    case Deriv::Minus: return "-";
    case Deriv::Plus: return "+";
  }
  return "";
}

}  // namespace

double Hom::at(double kappa) const {
  return boost::rational_cast<double>(r) + k * kappa;
}

std::string Hom::str() const {
  std::ostringstream os;
  bool any = false;
  if (r.numerator() != 0 || k == 0) {
    if (r.denominator() == 1)
      os << r.numerator();
    else
      os << r.numerator() << "/" << r.denominator();
    any = true;
  }
  if (k != 0) {
    if (k > 0 && any) os << "+";
    if (k < 0) os << "-";
    if (std::abs(k) != 1) os << std::abs(k);
    os << "k";
  }
  return os.str();
}

int uniform_sign(const Hom& h) {
  int s0 = h.r.numerator() != 0 ? sgn(h.r) : sgn(h.k);
  Rational v1 = h.r + kKappaMax * h.k;
  int s1 = v1.numerator() != 0 ? sgn(v1) : -sgn(h.k);
  if (s0 != s1)
    throw StructuralError("homogeneity " + h.str() + " changes sign for kappa in (0,1/10)");
  return s0;
}

Sym xi() {
  static const Sym s = [] {
    auto n = std::make_shared<Node>();
    n->op = Op::Xi;
    n->key = "Xi";
    n->hom = {Rational(-3, 2), -1};
    return n;
  }();
  return s;
}

Sym poly(int l0, int l1) {
  auto n = std::make_shared<Node>();
  n->op = Op::Poly;
  n->l0 = l0;
  n->l1 = l1;
  n->key = poly_key(l0, l1);
  n->hom = {Rational(2 * l0 + l1), 0};
  return n;
}

Sym one() {
  static const Sym s = poly(0, 0);
  return s;
}

Sym x1() {
  static const Sym s = poly(0, 1);
  return s;
}

bool is_poly(const Sym& s) { return s && s->op == Op::Poly; }

Sym edge(Op op, Deriv d, const Sym& arg) {
  if (!arg || arg->op == Op::Poly) return nullptr;
  auto n = std::make_shared<Node>();
  n->op = op;
  n->d = d;
  n->arg = arg;
  n->key = op_prefix(op) + deriv_suffix(d) + "(" + arg->key + ")";
  int gain = op == Op::E ? 1 : 2;
  if (d != Deriv::None) gain -= 1;
  n->hom = arg->hom + Hom{Rational(gain), 0};
  return n;
}

Sym prod(const Sym& a, const Sym& b) {
  if (!a || !b) return nullptr;
  std::vector<Sym> fs;
  int l0 = 0, l1 = 0;
  for (const Sym& s : {a, b}) {
    const std::vector<Sym> parts = s->op == Op::Prod ? s->factors : std::vector<Sym>{s};
    for (const Sym& p : parts) {
      if (p->op == Op::Poly) {
        l0 += p->l0;
        l1 += p->l1;
      } else {
        fs.push_back(p);
      }
    }
  }
  if (l0 != 0 || l1 != 0) fs.push_back(poly(l0, l1));
  if (fs.empty()) return one();
  if (fs.size() == 1) return fs[0];
  std::sort(fs.begin(), fs.end(), [](const Sym& x, const Sym& y) { return x->key < y->key; });
  auto n = std::make_shared<Node>();
  n->op = Op::Prod;
  n->factors = fs;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) n->key += "*";
    n->key += fs[i]->key;
    n->hom = n->hom + fs[i]->hom;
  }
  return n;
}

bool contains_E(const Sym& s) {
  if (!s) return false;
  if (s->op == Op::E) return true;
  if (s->arg) return contains_E(s->arg);
  return std::any_of(s->factors.begin(), s->factors.end(), contains_E);
}

int noise_count(const Sym& s) {
  if (!s) return 0;
  if (s->op == Op::Xi) return 1;
  if (s->arg) return noise_count(s->arg);
  int n = 0;
  for (const auto& f : s->factors) n += noise_count(f);
  return n;
}

bool basis_order(const Sym& a, const Sym& b) {
  if (a->hom != b->hom) return hom_less(a->hom, b->hom);
  return a->key > b->key;
}

int Basis::at(const std::string& key) const {
  auto it = index.find(key);
  if (it == index.end()) throw StructuralError("symbol outside the basis: " + key);
  return it->second;
}

std::string Basis::set_label(int i) const {
  const Sym& s = elems[i];
  if (s->op == Op::Poly) return s->l1 == 0 && s->l0 == 0 ? "V,U,U'" : "U";
  if (s->op == Op::Xi || s->op == Op::Prod) return "V";
  if (s->d == Deriv::None) return "U";
  if (s->d == Deriv::Prime) return "U'";
  return s->d == Deriv::Minus ? "U'-" : "U'+";
}

namespace {

using SymSet = std::map<std::string, Sym>;

void put(SymSet& set, const Sym& s) {
  if (s) set.emplace(s->key, s);
}

const Hom kCut{Rational(2), 0};

// Generation bound only: elements near it never reach W, so the kappa -> 0
// ordering is enough and avoids undecidable comparisons far from the cutoffs.
bool below(const Sym& s, const Hom& h) {
  if (!s) return false;
  Hom d = h - s->hom;
  return d.r.numerator() > 0 || (d.r.numerator() == 0 && d.k > 0);
}

SymSet polys_below_cut() {
  SymSet out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b) {
      Sym p = poly(a, b);
      if (below(p, kCut)) put(out, p);
    }
  return out;
}

constexpr int kMaxRounds = 16;

Basis finish(Structure st, const SymSet& V, const std::vector<const SymSet*>& Uprime,
             const SymSet& U) {
  SymSet W;
  const Hom zero{};
  const Hom half{Rational(1, 2), 0};
  const Hom three_half{Rational(3, 2), 0};
  for (const auto& [k, s] : V)
    if (!hom_less(zero, s->hom)) put(W, s);
  for (const SymSet* S : Uprime)
    for (const auto& [k, s] : *S)
      if (hom_less(s->hom, half)) put(W, s);
  for (const auto& [k, s] : U)
    if (hom_less(s->hom, three_half)) put(W, s);

  Basis b;
  b.structure = st;
  for (const auto& [k, s] : W) b.elems.push_back(s);
  std::sort(b.elems.begin(), b.elems.end(), basis_order);
  for (int i = 0; i < b.size(); ++i) b.index[b.elems[i]->key] = i;
  for (const Sym& s : b.elems) {
    if (!hom_less(s->hom, zero)) {
      b.plus_index[s->key] = static_cast<int>(b.plus.size());
      b.plus.push_back(s);
    }
    if (st == Structure::Continuous && s->op == Op::Prod && hom_less(s->hom, zero) &&
        noise_count(s) % 2 == 0)
      b.minus.push_back(s);
  }
  return b;
}

Basis generate_continuous() {
  SymSet V = polys_below_cut(), U = V, Up = V;
  put(V, xi());
  for (int round = 0;; ++round) {
    if (round == kMaxRounds) throw StructuralError("basis generation did not terminate");
    SymSet nV = V, nU = U, nUp = Up;
    for (const auto& [k, t] : V) {
      if (is_poly(t)) continue;
      if (Sym s = I(t); below(s, kCut)) put(nU, s);
      if (Sym s = Ip(t); below(s, kCut)) put(nUp, s);
    }
    for (const auto& [ka, a] : Up)
      for (const auto& [kb, b] : Up)
        if (Sym p = prod(a, b); below(p, kCut)) put(nV, p);
    if (nV.size() == V.size() && nU.size() == U.size() && nUp.size() == Up.size()) break;
    V.swap(nV);
    U.swap(nU);
    Up.swap(nUp);
  }
  return finish(Structure::Continuous, V, {&Up}, U);
}

Basis generate_discrete() {
  const SymSet polys = polys_below_cut();
  SymSet V = polys, U = polys, Um = polys, Upl = polys;
  put(V, xi());
  put(U, edge(Op::I, Deriv::None, xi()));
  put(Um, edge(Op::I, Deriv::Minus, xi()));
  put(Upl, edge(Op::I, Deriv::Plus, xi()));
  for (int round = 0;; ++round) {
    if (round == kMaxRounds) throw StructuralError("basis generation did not terminate");
    SymSet nV = V, nU = U, nUm = Um, nUp = Upl;
    const std::pair<Deriv, SymSet*> targets[3] = {
        {Deriv::None, &nU}, {Deriv::Minus, &nUm}, {Deriv::Plus, &nUp}};
    for (const auto& [k, t] : V) {
      if (t->op == Op::Xi || is_poly(t)) continue;
      for (const auto& [d, S] : targets)
        if (Sym s = edge(Op::It, d, t); below(s, kCut)) put(*S, s);
    }
    for (const auto& [ka, a] : Um)
      for (const auto& [kb, b] : Upl)
        if (Sym p = prod(a, b); below(p, kCut)) put(nV, p);
    for (const SymSet* src : {&Um, &Upl})
      for (const auto& [k, t] : *src) {
        if (is_poly(t)) continue;
        for (const auto& [d, S] : targets)
          if (Sym s = edge(Op::Itt, d, t); below(s, kCut)) put(*S, s);
      }
    for (const auto& [k, t] : Um) {
      if (is_poly(t)) continue;
      Sym inner = edge(Op::Itt, Deriv::Plus, t);
      for (const auto& [d, S] : targets)
        if (Sym s = edge(Op::E, d, inner); below(s, kCut)) put(*S, s);
    }
    if (nV.size() == V.size() && nU.size() == U.size() && nUm.size() == Um.size() &&
        nUp.size() == Upl.size())
      break;
    V.swap(nV);
    U.swap(nU);
    Um.swap(nUm);
    Upl.swap(nUp);
  }
  return finish(Structure::Discrete, V, {&Um, &Upl}, U);
}

}  // namespace

Basis generate_basis(Structure s) {
  return s == Structure::Continuous ? generate_continuous() : generate_discrete();
}

Mono mono_mul(const Mono& a, const Mono& b) {
  Mono m = a;
  m.insert(m.end(), b.begin(), b.end());
  std::sort(m.begin(), m.end());
  return m;
}

void Tensor::add(const Rational& c, const Sym& s, const Mono& m) {
  if (!s || c.numerator() == 0) return;
  auto key = std::make_pair(s->key, m);
  auto it = terms.find(key);
  if (it == terms.end()) {
    terms.emplace(key, Term{c, s, m});
    return;
  }
  it->second.c += c;
  if (it->second.c.numerator() == 0) terms.erase(it);
}

Tensor Tensor::operator*(const Tensor& o) const {
  Tensor out;
  for (const auto& [ka, a] : terms)
    for (const auto& [kb, b] : o.terms) out.add(a.c * b.c, prod(a.sym, b.sym), mono_mul(a.mono, b.mono));
  return out;
}

std::string Tensor::str(bool mono_left) const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, t] : terms) {
    if (!first) os << " + ";
    first = false;
    if (t.c != Rational(1)) os << t.c.numerator() << (t.c.denominator() != 1 ? "/" + std::to_string(t.c.denominator()) : "") << " ";
    std::string m;
    for (std::size_t i = 0; i < t.mono.size(); ++i) m += (i ? "." : "") + t.mono[i];
    if (m.empty()) m = "1";
    if (mono_left)
      os << m << " (x) " << t.sym->key;
    else
      os << t.sym->key << " (x) " << m;
  }
  return first ? "0" : os.str();
}

namespace {

Tensor apply_left(const Tensor& t, Op op, Deriv d) {
  Tensor out;
  for (const auto& [k, term] : t.terms) out.add(term.c, edge(op, d, term.sym), term.mono);
  return out;
}

Tensor delta_x1() {
  Tensor t;
  t.add(1, x1(), {});
  t.add(1, one(), {x1()->key});
  return t;
}

Tensor coproduct_rec(const Sym& tau, bool discrete) {
  if (!tau) throw StructuralError("coproduct of zero");
  Tensor out;
  switch (tau->op) {
    case Op::Xi:
      out.add(1, tau, {});
      return out;
    case Op::Poly: {
      if (tau->l0 != 0) throw StructuralError("time polynomial outside the structure: " + tau->key);
      out.add(1, one(), {});
      for (int i = 0; i < tau->l1; ++i) out = out * delta_x1();
      return out;
    }
    case Op::Prod: {
      out.add(1, one(), {});
      for (const Sym& f : tau->factors) out = out * coproduct_rec(f, discrete);
      return out;
    }
    default:
      break;
  }
  const Sym& arg = tau->arg;
  out = apply_left(coproduct_rec(arg, discrete), tau->op, tau->d);
  const int s = uniform_sign(arg->hom - Hom{Rational(-1), 0});
  if (s == 0) throw StructuralError("argument at the integration threshold: " + arg->key);
  const Mono X{x1()->key};

  if (!discrete) {
    if (tau->op != Op::I) throw StructuralError("discrete symbol in continuous coproduct");
    if (tau->d == Deriv::None) {
      out.add(1, one(), {tau->key});
      if (s > 0) {
        Sym der = Ip(arg);
        out.add(1, x1(), {der->key});
        out.add(1, one(), mono_mul(X, {der->key}));
      }
    } else if (s > 0) {
      out.add(1, one(), {tau->key});
    }
    return out;
  }

  const Rational half(1, 2);
  if (tau->op == Op::E) {
    out.add(1, one(), {tau->key});
    if (tau->d == Deriv::None) {
      Sym der = edge(Op::E, Deriv::Minus, arg);
      out.add(1, x1(), {der->key});
      out.add(1, one(), mono_mul(X, {der->key}));
    }
    return out;
  }
  if (tau->op == Op::I && tau->d == Deriv::Prime)
    throw StructuralError("continuous symbol in discrete coproduct");
  if (tau->d == Deriv::None) out.add(1, one(), {tau->key});
  if (s > 0) {
    for (Deriv d : {Deriv::Minus, Deriv::Plus}) {
      Sym der = edge(tau->op, d, arg);
      if (tau->d == Deriv::None) {
        out.add(half, x1(), {der->key});
        out.add(half, one(), mono_mul(X, {der->key}));
      } else {
        out.add(half, one(), {der->key});
      }
    }
  }
  return out;
}

}  // namespace

Tensor coproduct(const Sym& tau) { return coproduct_rec(tau, false); }
Tensor discrete_coproduct(const Sym& tau) { return coproduct_rec(tau, true); }

Hom mono_hom(const Mono& m, const std::map<std::string, Sym>& lookup) {
  Hom h;
  for (const auto& k : m) {
    auto it = lookup.find(k);
    if (it == lookup.end()) throw StructuralError("unknown generator " + k);
    h = h + it->second->hom;
  }
  return h;
}

// ---- negative twisting ----

namespace {

struct VEdge {
  Op op;
  Deriv d;
  int child;
};

struct Vertex {
  int xi = 0;
  int l0 = 0, l1 = 0;
  std::vector<VEdge> edges;
};

struct VTree {
  std::vector<Vertex> v;

  int build(const Sym& s) {
    int id = static_cast<int>(v.size());
    v.emplace_back();
    add_factor(id, s);
    return id;
  }

  void add_factor(int id, const Sym& s) {
    switch (s->op) {
      case Op::Xi: v[id].xi += 1; break;
      case Op::Poly:
        v[id].l0 += s->l0;
        v[id].l1 += s->l1;
        break;
      case Op::Prod:
        for (const Sym& f : s->factors) add_factor(id, f);
        break;
      default: {
        int c = build(s->arg);
        v[id].edges.push_back({s->op, s->d, c});
      }
    }
  }
};

struct Emb {
  std::set<int> covered;
  std::set<std::pair<int, int>> used;  // (vertex, edge index); edge -1 is the noise
  int root = -1;
  std::string pattern;
};

// Pattern: a product symbol matched with its root at target vertex tv.
std::vector<Emb> embed(const VTree& pat, int pv, const VTree& tgt, int tv) {
  const Vertex& P = pat.v[pv];
  const Vertex& T = tgt.v[tv];
  if (P.xi > T.xi || P.l0 != 0 || P.l1 != 0) return {};
  Emb base;
  base.covered.insert(tv);
  base.root = tv;
  for (int i = 0; i < P.xi; ++i) base.used.insert({tv, -1 - i});

  // identical pattern edges are mapped to increasing target edges
  std::function<std::string(const VTree&, int)> sig = [&](const VTree& tr, int id) {
    const Vertex& x = tr.v[id];
    std::vector<std::string> parts;
    for (const auto& e : x.edges)
      parts.push_back(op_prefix(e.op) + deriv_suffix(e.d) + "(" + sig(tr, e.child) + ")");
    std::sort(parts.begin(), parts.end());
    std::string s = "[" + std::to_string(x.xi);
    for (auto& p : parts) s += "," + p;
    return s + "]";
  };
  std::vector<int> order(P.edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::vector<std::string> psig(P.edges.size());
  for (std::size_t i = 0; i < P.edges.size(); ++i)
    psig[i] = op_prefix(P.edges[i].op) + deriv_suffix(P.edges[i].d) + sig(pat, P.edges[i].child);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return psig[a] < psig[b]; });

  std::vector<Emb> out;
  std::vector<int> assigned(order.size(), -1);
  std::vector<bool> taken(T.edges.size(), false);
  std::function<void(std::size_t, Emb)> rec = [&](std::size_t j, Emb cur) {
    if (j == order.size()) {
      out.push_back(cur);
      return;
    }
    const VEdge& pe = P.edges[order[j]];
    std::size_t start = 0;
    if (j > 0 && psig[order[j]] == psig[order[j - 1]]) start = static_cast<std::size_t>(assigned[j - 1]) + 1;
    for (std::size_t t = start; t < T.edges.size(); ++t) {
      if (taken[t]) continue;
      const VEdge& te = T.edges[t];
      if (te.op != pe.op || te.d != pe.d) continue;
      for (const Emb& sub : embed(pat, pe.child, tgt, te.child)) {
        Emb next = cur;
        next.covered.insert(sub.covered.begin(), sub.covered.end());
        next.used.insert(sub.used.begin(), sub.used.end());
        next.used.insert({tv, static_cast<int>(t)});
        taken[t] = true;
        assigned[j] = static_cast<int>(t);
        rec(j + 1, next);
        taken[t] = false;
      }
    }
  };
  rec(0, base);
  return out;
}

Sym rebuild(const VTree& tr, int id, const std::map<int, const Emb*>& roots);

// Factors left over in the contracted region of e, collected from vertex id.
Sym collect(const VTree& tr, int id, const Emb& e, const std::map<int, const Emb*>& roots) {
  const Vertex& x = tr.v[id];
  Sym acc = poly(x.l0, x.l1);
  for (int i = 0; i < x.xi; ++i)
    if (!e.used.count({id, -1 - i})) acc = prod(acc, xi());
  for (std::size_t k = 0; k < x.edges.size(); ++k) {
    const VEdge& ed = x.edges[k];
    if (e.used.count({id, static_cast<int>(k)}))
      acc = prod(acc, collect(tr, ed.child, e, roots));
    else
      acc = prod(acc, edge(ed.op, ed.d, rebuild(tr, ed.child, roots)));
  }
  return acc;
}

Sym rebuild(const VTree& tr, int id, const std::map<int, const Emb*>& roots) {
  auto it = roots.find(id);
  if (it != roots.end()) return collect(tr, id, *it->second, roots);
  const Vertex& x = tr.v[id];
  Sym acc = poly(x.l0, x.l1);
  for (int i = 0; i < x.xi; ++i) acc = prod(acc, xi());
  for (const VEdge& ed : x.edges) acc = prod(acc, edge(ed.op, ed.d, rebuild(tr, ed.child, roots)));
  return acc;
}

}  // namespace

Tensor delta_minus(const Sym& tau, const Basis& basis) {
  Tensor out;
  VTree tgt;
  tgt.build(tau);
  std::vector<Emb> all;
  for (const Sym& a : basis.minus) {
    VTree pat;
    pat.build(a);
    for (int v = 0; v < static_cast<int>(tgt.v.size()); ++v)
      for (Emb e : embed(pat, 0, tgt, v)) {
        e.pattern = a->key;
        all.push_back(std::move(e));
      }
  }
  std::vector<const Emb*> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == all.size()) {
      std::map<int, const Emb*> roots;
      Mono m;
      for (const Emb* e : chosen) {
        roots[e->root] = e;
        m.push_back(e->pattern);
      }
      std::sort(m.begin(), m.end());
      out.add(1, rebuild(tgt, 0, roots), m);
      return;
    }
    rec(i + 1);
    for (const Emb* e : chosen)
      for (int v : all[i].covered)
        if (e->covered.count(v)) return;
    chosen.push_back(&all[i]);
    rec(i + 1);
    chosen.pop_back();
  };
  rec(0);
  return out;
}

// ---- polynomials and matrices ----

Poly Poly::constant(const Rational& v, int nvars) {
  Poly p;
  if (v.numerator() != 0) p.c[std::vector<int>(nvars, 0)] = v;
  return p;
}

void Poly::add(const Poly& o, const Rational& s) {
  for (const auto& [e, v] : o.c) {
    auto& slot = c[e];
    slot += s * v;
    if (slot.numerator() == 0) c.erase(e);
  }
}

Poly Poly::operator*(const Poly& o) const {
  Poly out;
  for (const auto& [ea, va] : c)
    for (const auto& [eb, vb] : o.c) {
      std::vector<int> e(ea.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      Poly t;
      t.c[e] = va * vb;
      out.add(t);
    }
  return out;
}

double Poly::eval(const std::vector<double>& a) const {
  double s = 0;
  for (const auto& [e, v] : c) {
    double term = boost::rational_cast<double>(v);
    for (std::size_t i = 0; i < e.size(); ++i)
      for (int p = 0; p < e[i]; ++p) term *= a[i + 1];
    s += term;
  }
  return s;
}

std::string Poly::str() const {
  if (c.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, v] : c) {
    if (!first) os << " + ";
    first = false;
    bool constant = std::all_of(e.begin(), e.end(), [](int x) { return x == 0; });
    if (v != Rational(1) || constant) {
      os << v.numerator();
      if (v.denominator() != 1) os << "/" << v.denominator();
    }
    for (std::size_t i = 0; i < e.size(); ++i)
      for (int p = 0; p < e[i]; ++p) os << "a" << (i + 1);
  }
  return os.str();
}

namespace {

Poly mono_poly(const Basis& b, const Mono& m) {
  const int nv = static_cast<int>(b.plus.size()) - 1;
  std::vector<int> e(nv, 0);
  for (const auto& k : m) {
    auto it = b.plus_index.find(k);
    if (it == b.plus_index.end()) throw StructuralError("generator outside W_+: " + k);
    if (it->second == 0) continue;
    e[it->second - 1] += 1;
  }
  Poly p;
  p.c[e] = 1;
  return p;
}

}  // namespace

SymMatrix gamma_symbolic(const Basis& b) {
  const int n = b.size();
  SymMatrix m(n, std::vector<Poly>(n));
  for (int col = 0; col < n; ++col) {
    Tensor t = b.structure == Structure::Continuous ? coproduct(b.elems[col])
                                                     : discrete_coproduct(b.elems[col]);
    for (const auto& [k, term] : t.terms) {
      int row = b.at(term.sym->key);
      Poly p = mono_poly(b, term.mono);
      m[row][col].add(p, term.c);
    }
  }
  return m;
}

Eigen::MatrixXd eval_matrix(const SymMatrix& m, const std::vector<double>& a) {
  const int n = static_cast<int>(m.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!m[i][j].zero()) out(i, j) = m[i][j].eval(a);
  return out;
}

Eigen::MatrixXd gamma_matrix(const Basis& b, const Character& f) {
  if (f.a.size() != b.plus.size()) throw StructuralError("character has the wrong length");
  return eval_matrix(gamma_symbolic(b), f.a);
}

Character character_from_matrix(const Basis& b, const Eigen::MatrixXd& m) {
  const int unit = b.at(one()->key);
  Character h;
  h.a.assign(b.plus.size(), 0.0);
  h.a[0] = 1.0;
  // W_+ is sorted by homogeneity, so lower generators are known when needed
  for (std::size_t i = 1; i < b.plus.size(); ++i) {
    const Sym& w = b.plus[i];
    Tensor t = b.structure == Structure::Continuous ? coproduct(w) : discrete_coproduct(w);
    double rest = 0, lead = 0;
    for (const auto& [k, term] : t.terms) {
      if (term.sym->key != one()->key) continue;
      const double c = boost::rational_cast<double>(term.c);
      if (term.mono == Mono{w->key}) {
        lead += c;
        continue;
      }
      rest += c * mono_poly(b, term.mono).eval(h.a);
    }
    if (lead == 0) throw StructuralError("generator not visible in the row of 1: " + w->key);
    h.a[i] = (m(unit, b.at(w->key)) - rest) / lead;
  }
  return h;
}

Eigen::MatrixXd renorm_matrix(const Basis& b, const RenormCharacter& g) {
  const Sym tau2 = prod(Ip(xi()), Ip(xi()));
  const Sym tau3 = prod(Ip(tau2), Ip(xi()));
  std::map<std::string, double> gv{
      {prod(Ip(Ip(xi())), Ip(xi()))->key, -g.C0},
      {tau2->key, -g.C1},
      {prod(Ip(tau2), Ip(tau2))->key, -g.C2},
      {prod(Ip(tau3), Ip(xi()))->key, -g.C3},
  };
  const int n = b.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int col = 0; col < n; ++col) {
    Tensor t = delta_minus(b.elems[col], b);
    for (const auto& [k, term] : t.terms) {
      double w = boost::rational_cast<double>(term.c);
      for (const auto& key : term.mono) {
        auto it = gv.find(key);
        if (it == gv.end()) throw StructuralError("no renormalisation constant for " + key);
        w *= it->second;
      }
      m(b.at(term.sym->key), col) += w;
    }
  }
  return m;
}

std::vector<double> char_poly(const Eigen::MatrixXd& a) {
  // Faddeev-LeVerrier
  const int n = static_cast<int>(a.rows());
  std::vector<double> c(n + 1, 0.0);
  c[0] = 1.0;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd Id = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    M = a * M + c[k - 1] * Id;
    c[k] = -(a * M).trace() / k;
  }
  return c;
}

}  // namespace wasep::rs
