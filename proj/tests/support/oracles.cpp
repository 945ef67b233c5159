#include "oracles.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "bracket_reach/expr.hpp"

namespace oracle {

namespace fx = bracket_reach::fields;

Poly Poly::constant(double c) {
  Poly p;
  p.add({0, 0, 0, 0}, c);
  return p;
}

Poly Poly::variable(int i) {
  Poly p;
  Key k{0, 0, 0, 0};
  k[static_cast<std::size_t>(i)] = 1;
  p.add(k, 1.0);
  return p;
}

void Poly::add(const Key& k, double c) {
  if (c == 0.0) return;
  auto& v = terms_[k];
  v += c;
  if (v == 0.0) terms_.erase(k);
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (const auto& [k, c] : o.terms_) r.add(k, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + o.scaled(-1.0); }

Poly Poly::operator*(const Poly& o) const {
  Poly r;
  for (const auto& [ka, ca] : terms_)
    for (const auto& [kb, cb] : o.terms_) {
      Key k;
      for (std::size_t i = 0; i < 4; ++i) k[i] = ka[i] + kb[i];
      r.add(k, ca * cb);
    }
  return r;
}

Poly Poly::scaled(double c) const {
  Poly r;
  for (const auto& [k, v] : terms_) r.add(k, v * c);
  return r;
}

Poly Poly::derivative(int i) const {
  Poly r;
  const auto idx = static_cast<std::size_t>(i);
  for (const auto& [k, v] : terms_) {
    if (k[idx] == 0) continue;
    Key d = k;
    d[idx] -= 1;
    r.add(d, v * k[idx]);
  }
  return r;
}

double Poly::operator()(const Vector& x) const {
  double s = 0.0;
  for (const auto& [k, v] : terms_) {
    double m = v;
    for (int i = 0; i < static_cast<int>(x.size()); ++i)
      for (int e = 0; e < k[static_cast<std::size_t>(i)]; ++e) m *= x[i];
    s += m;
  }
  return s;
}

fx::Expr Poly::to_expr() const {
  fx::Expr sum = fx::constant(0.0);
  for (const auto& [k, v] : terms_) {
    fx::Expr m = fx::constant(v);
    for (int i = 0; i < 4; ++i)
      for (int e = 0; e < k[static_cast<std::size_t>(i)]; ++e) m = m * fx::variable(i);
    sum = sum + m;
  }
  return sum;
}

PolyField bracket(const PolyField& x, const PolyField& y) {
  const std::size_t n = x.size();
  PolyField out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[i] = out[i] + x[j] * y[i].derivative(static_cast<int>(j)) -
               y[j] * x[i].derivative(static_cast<int>(j));
  return out;
}

Vector evaluate(const PolyField& f, const Vector& x) {
  Vector v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) v[static_cast<Eigen::Index>(i)] = f[i](x);
  return v;
}

fx::SmoothField to_field(const PolyField& f) {
  std::vector<fx::Expr> c;
  for (const auto& p : f) c.push_back(p.to_expr());
  return fx::SmoothField(std::move(c));
}

PolyField nested(const std::vector<PolyField>& gens, const std::vector<int>& word) {
  PolyField acc = gens[static_cast<std::size_t>(word.back() - 1)];
  for (int i = static_cast<int>(word.size()) - 2; i >= 0; --i)
    acc = bracket(gens[static_cast<std::size_t>(word[static_cast<std::size_t>(i)] - 1)], acc);
  return acc;
}

std::vector<PolyField> all_bracketings(const std::vector<PolyField>& gens, int max_leaves) {
  // trees[n] = brackets of every tree with exactly n leaves.
  std::vector<std::vector<PolyField>> trees(static_cast<std::size_t>(max_leaves + 1));
  trees[1] = gens;
  for (int n = 2; n <= max_leaves; ++n)
    for (int left = 1; left < n; ++left)
      for (const auto& a : trees[static_cast<std::size_t>(left)])
        for (const auto& b : trees[static_cast<std::size_t>(n - left)])
          trees[static_cast<std::size_t>(n)].push_back(bracket(a, b));
  std::vector<PolyField> all;
  for (int n = 1; n <= max_leaves; ++n)
    all.insert(all.end(), trees[static_cast<std::size_t>(n)].begin(),
               trees[static_cast<std::size_t>(n)].end());
  return all;
}

PolySpec make_spec(const std::string& name, std::vector<PolyField> gens, double half_width) {
  std::vector<fx::SmoothField> fields;
  for (const auto& g : gens) fields.push_back(to_field(g));
  const int n = static_cast<int>(gens.front().size());
  fx::Box box{Vector::Constant(n, -half_width), Vector::Constant(n, half_width)};
  auto spec = std::make_shared<const fx::DistributionSpec>(name, std::move(fields), box);
  return {std::move(gens), std::move(spec)};
}

namespace {

PolyField unit(int n, int i) {
  PolyField f(static_cast<std::size_t>(n));
  f[static_cast<std::size_t>(i)] = Poly::constant(1.0);
  return f;
}

}  // namespace

PolySpec heisenberg() {
  auto x2 = unit(3, 1);
  x2[2] = Poly::variable(0);
  return make_spec("heisenberg", {unit(3, 0), x2}, 2.0);
}

PolySpec martinet() {
  auto x2 = unit(3, 1);
  x2[2] = Poly::variable(0) * Poly::variable(0);
  return make_spec("martinet", {unit(3, 0), x2}, 2.0);
}

PolySpec engel() {
  auto x2 = unit(4, 1);
  x2[2] = Poly::variable(0);
  x2[3] = Poly::variable(2);
  return make_spec("engel", {unit(4, 0), x2}, 2.0);
}

PolySpec involutive() { return make_spec("involutive2", {unit(3, 0), unit(3, 1)}, 2.0); }

PolySpec random_cubic(std::uint64_t seed, double half_width) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-0.5, 0.5);
  std::vector<PolyField> gens;
  for (int g = 0; g < 2; ++g) {
    PolyField f(3);
    for (int i = 0; i < 3; ++i) {
      Poly p = Poly::constant(i == g ? 1.0 : 0.0);
      for (int a = 0; a <= 3; ++a)
        for (int b = 0; a + b <= 3; ++b)
          for (int c = 0; a + b + c <= 3; ++c) {
            if (a + b + c == 0) continue;
            // Sparse: roughly a third of the monomials present.
            if (rng() % 3 != 0) continue;
            p.add({a, b, c, 0}, coef(rng) / (a + b + c));
          }
      f[static_cast<std::size_t>(i)] = p;
    }
    gens.push_back(std::move(f));
  }
  return make_spec("random-cubic-" + std::to_string(seed), std::move(gens), half_width);
}

Vector heisenberg_flow(int k, const Vector& x, double t) {
  Vector y = x;
  if (k == 1) {
    y[0] += t;
  } else {
    y[1] += t;
    y[2] += t * x[0];
  }
  return y;
}

Vector martinet_flow(int k, const Vector& x, double t) {
  Vector y = x;
  if (k == 1) {
    y[0] += t;
  } else {
    y[1] += t;
    y[2] += t * x[0] * x[0];
  }
  return y;
}

Vector engel_flow(int k, const Vector& x, double t) {
  Vector y = x;
  if (k == 1) {
    y[0] += t;
  } else {
    y[1] += t;
    y[2] += x[0] * t;
    y[3] += x[2] * t + 0.5 * x[0] * t * t;
  }
  return y;
}

int numeric_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * s[0]) ++r;
  return r;
}

std::vector<std::vector<int>> greedy_frame(const std::vector<PolyField>& gens, const Vector& x,
                                           int max_length, int wanted) {
  const int p = static_cast<int>(gens.size());
  std::vector<std::vector<int>> words;
  for (int len = 1; len <= max_length; ++len) {
    std::vector<int> w(static_cast<std::size_t>(len), 1);
    while (true) {
      words.push_back(w);
      int i = len - 1;
      while (i >= 0 && w[static_cast<std::size_t>(i)] == p) w[static_cast<std::size_t>(i--)] = 1;
      if (i < 0) break;
      ++w[static_cast<std::size_t>(i)];
    }
  }
  std::vector<std::vector<int>> chosen;
  Matrix cols(x.size(), 0);
  int rank = 0;
  for (const auto& w : words) {
    if (static_cast<int>(chosen.size()) == wanted) break;
    Matrix trial(x.size(), cols.cols() + 1);
    trial << cols, evaluate(nested(gens, w), x);
    const int r = numeric_rank(trial);
    if (r > rank) {
      rank = r;
      cols = trial;
      chosen.push_back(w);
    }
  }
  return chosen;
}

Vector random_point_in_ball(std::mt19937_64& rng, int dim, double radius) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  Vector d(dim);
  for (int i = 0; i < dim; ++i) d[i] = n01(rng);
  d.normalize();
  return d * radius * std::pow(u01(rng), 1.0 / dim);
}

}  // namespace oracle
