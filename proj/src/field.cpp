#include "bracket_reach/field.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "bracket_reach/errors.hpp"

namespace bracket_reach::fields {

SmoothField::State::State(std::vector<Expr> c) : components(std::move(c)), tape(components) {}

SmoothField::SmoothField(std::vector<Expr> components) {
  if (components.empty()) throw InvalidArgument("vector field needs at least one component");
  state_ = std::make_shared<const State>(std::move(components));
}

Vector SmoothField::operator()(const Vector& x) const {
  Vector out(dim());
  evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
           std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

void SmoothField::evaluate(std::span<const double> x, std::span<double> out) const {
  state_->tape.run(x, out);
}

const SmoothField::State& SmoothField::ensure_jacobian() const {
  std::call_once(state_->jacobian_once, [this] {
    const int n = dim();
    std::vector<Expr> jac;
    jac.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) jac.push_back(derivative(state_->components[i], j));
    state_->jacobian_tape = std::make_unique<Tape>(jac);
    state_->jacobian = std::move(jac);
  });
  return *state_;
}

const std::vector<Expr>& SmoothField::jacobian_exprs() const { return ensure_jacobian().jacobian; }

Matrix SmoothField::jacobian(const Vector& x) const {
  const State& s = ensure_jacobian();
  const int n = dim();
  std::vector<double> flat(static_cast<std::size_t>(n * n));
  s.jacobian_tape->run(std::span<const double>(x.data(), static_cast<std::size_t>(n)), flat);
  Matrix j(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) j(r, c) = flat[static_cast<std::size_t>(r * n + c)];
  return j;
}

std::size_t SmoothField::complexity() const { return state_->tape.instruction_count(); }

BracketWord::BracketWord(std::vector<int> indices) : indices_(std::move(indices)) {
  if (indices_.empty()) throw InvalidArgument("bracket word must have length >= 1");
  for (int i : indices_)
    if (i < 1) throw IndexOutOfRange("bracket word index " + std::to_string(i) + " < 1");
}

BracketWord BracketWord::parse(const std::string& text) {
  std::string body;
  for (char c : text)
    if (c != '(' && c != ')' && c != ' ') body.push_back(c);
  if (body.empty()) throw InvalidArgument("empty bracket word");
  std::vector<int> idx;
  std::size_t start = 0;
  while (start <= body.size()) {
    const auto end = std::min(body.find(',', start), body.size());
    const std::string token = body.substr(start, end - start);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (token.empty() || used != token.size())
      throw InvalidArgument("malformed bracket word '" + text + "'");
    idx.push_back(v);
    start = end + 1;
  }
  return BracketWord(std::move(idx));
}

BracketWord BracketWord::tail() const {
  if (length() < 2) throw InvalidArgument("word of length 1 has no tail");
  return BracketWord(std::vector<int>(indices_.begin() + 1, indices_.end()));
}

std::string BracketWord::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < indices_.size(); ++k) os << (k ? "," : "") << indices_[k];
  os << ')';
  return os.str();
}

void BracketWord::validate(int generators) const {
  for (int i : indices_)
    if (i < 1 || i > generators)
      throw IndexOutOfRange("bracket word " + to_string() + " references generator " +
                            std::to_string(i) + " of " + std::to_string(generators));
}

bool Box::contains(const Vector& x) const {
  return contains(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

bool Box::contains(std::span<const double> x) const {
  for (int i = 0; i < dim(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

double Box::margin(const Vector& x) const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) m = std::min({m, x[i] - lower[i], upper[i] - x[i]});
  return m;
}

Box Box::shrunk(double factor) const {
  const Vector c = 0.5 * (lower + upper);
  const Vector h = 0.5 * factor * (upper - lower);
  return Box{c - h, c + h};
}

std::vector<Vector> Box::grid(int per_axis) const {
  const int n = dim();
  std::vector<Vector> pts;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    Vector p(n);
    for (int i = 0; i < n; ++i) {
      const double f = per_axis == 1 ? 0.5 : static_cast<double>(idx[i]) / (per_axis - 1);
      p[i] = lower[i] + f * (upper[i] - lower[i]);
    }
    pts.push_back(std::move(p));
    int k = n - 1;
    while (k >= 0 && ++idx[k] == per_axis) idx[k--] = 0;
    if (k < 0) break;
  }
  return pts;
}

DistributionSpec::DistributionSpec(std::string name_, std::vector<SmoothField> generators_,
                                   Box box_)
    : name(std::move(name_)), generators(std::move(generators_)), box(std::move(box_)) {
  if (generators.empty()) throw InvalidArgument("distribution needs at least one generator");
  dim = generators.front().dim();
  for (const auto& g : generators)
    if (g.dim() != dim) throw DimensionMismatch("generators have different dimensions");
  if (box.dim() != dim) throw DimensionMismatch("domain box dimension differs from generators");
  for (int i = 0; i < dim; ++i)
    if (!(box.lower[i] <= box.upper[i])) throw InvalidArgument("domain box is empty");
}

const SmoothField& DistributionSpec::generator(int k) const {
  if (k < 1 || k > generator_count())
    throw IndexOutOfRange("generator index " + std::to_string(k) + " out of range");
  return generators[static_cast<std::size_t>(k - 1)];
}

SmoothField lie_bracket(const SmoothField& x, const SmoothField& y) {
  if (x.dim() != y.dim()) throw DimensionMismatch("lie_bracket: fields of different dimension");
  const int n = x.dim();
  const auto& jx = x.jacobian_exprs();
  const auto& jy = y.jacobian_exprs();
  std::vector<Expr> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Expr acc = constant(0.0);
    for (int j = 0; j < n; ++j) {
      acc = acc + jy[static_cast<std::size_t>(i * n + j)] * x.components()[j];
      acc = acc - jx[static_cast<std::size_t>(i * n + j)] * y.components()[j];
    }
    out.push_back(acc);
  }
  return SmoothField(std::move(out));
}

SmoothField iterated_bracket(const DistributionSpec& spec, const BracketWord& word) {
  word.validate(spec.generator_count());
  SmoothField acc = spec.generator(word[word.length() - 1]);
  for (int k = word.length() - 2; k >= 0; --k) acc = lie_bracket(spec.generator(word[k]), acc);
  return acc;
}

const SmoothField& BracketTable::get(const BracketWord& word) const {
  word.validate(spec_->generator_count());
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(word); it != cache_.end()) return *it->second;
  }
  SmoothField f = word.length() == 1 ? spec_->generator(word.first())
                                     : lie_bracket(spec_->generator(word.first()), get(word.tail()));
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.emplace(word, std::make_unique<SmoothField>(std::move(f)));
  return *it->second;
}

std::vector<BracketWord> enumerate_words(int generators, int max_length) {
  std::vector<BracketWord> out;
  for (int len = 1; len <= max_length; ++len) {
    std::vector<int> idx(static_cast<std::size_t>(len), 1);
    while (true) {
      out.emplace_back(idx);
      int k = len - 1;
      while (k >= 0 && ++idx[k] > generators) idx[k--] = 1;
      if (k < 0) break;
    }
  }
  return out;
}

}  // namespace bracket_reach::fields
