#include "bracket_reach/tape.hpp"

#include <cmath>
#include <unordered_map>

namespace bracket_reach::fields {

namespace {

bool is_binary(Op op) { return op >= Op::kAdd && op <= Op::kDiv; }

double apply_pow(double a, double p) {
  if (p == 0.5) return std::sqrt(a);
  return std::pow(a, p);
}

// Derivatives of f at v up to `order` for the unary primitives, used to
// compose jets.
std::vector<double> unary_derivatives(Op op, double v, double p, int order) {
  std::vector<double> d(order + 1, 0.0);
  switch (op) {
    case Op::kSin:
    case Op::kCos: {
      const double s = std::sin(v), c = std::cos(v);
      const double cycle_sin[4] = {s, c, -s, -c};
      const double cycle_cos[4] = {c, -s, -c, s};
      for (int n = 0; n <= order; ++n) d[n] = (op == Op::kSin ? cycle_sin : cycle_cos)[n % 4];
      break;
    }
    case Op::kExp: {
      const double e = std::exp(v);
      for (int n = 0; n <= order; ++n) d[n] = e;
      break;
    }
    case Op::kSqrt:
      p = 0.5;
      [[fallthrough]];
    case Op::kPow: {
      const bool integral = std::floor(p) == p && p >= 0.0;
      double coeff = 1.0;
      for (int n = 0; n <= order; ++n) {
        if (integral && n > p) break;
        d[n] = coeff * (n == 0 && op == Op::kSqrt ? std::sqrt(v) : std::pow(v, p - n));
        coeff *= (p - n);
      }
      break;
    }
    case Op::kAbs:
      d[0] = std::abs(v);
      if (order >= 1) d[1] = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
      break;
    case Op::kSign:
      d[0] = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
      break;
    default:
      break;
  }
  return d;
}

}  // namespace

Tape::Tape(std::span<const Expr> roots) {
  std::unordered_map<const Node*, std::uint32_t> slot;
  // Iterative post-order so deep trees cannot overflow the stack.
  for (const Expr& root : roots) {
    std::vector<std::pair<const Node*, bool>> stack{{root.get(), false}};
    while (!stack.empty()) {
      auto [n, expanded] = stack.back();
      stack.pop_back();
      if (slot.count(n)) continue;
      const bool leaf = n->op == Op::kConst || n->op == Op::kVar;
      if (!leaf && !expanded) {
        stack.push_back({n, true});
        if (is_binary(n->op)) stack.push_back({n->b.get(), false});
        stack.push_back({n->a.get(), false});
        continue;
      }
      Instruction ins;
      ins.op = n->op;
      ins.index = n->index;
      ins.value = n->value;
      ins.r1 = n->r1;
      ins.r2 = n->r2;
      if (!leaf) {
        ins.a = slot.at(n->a.get());
        if (is_binary(n->op)) ins.b = slot.at(n->b.get());
      }
      slot.emplace(n, static_cast<std::uint32_t>(code_.size()));
      code_.push_back(ins);
    }
    outputs_.push_back(slot.at(root.get()));
  }
}

template <>
void Tape::execute<double>(std::span<const double> x, std::vector<double>& s) const {
  s.resize(code_.size());
  for (std::size_t k = 0; k < code_.size(); ++k) {
    const Instruction& in = code_[k];
    double r = 0.0;
    switch (in.op) {
      case Op::kConst: r = in.value; break;
      case Op::kVar: r = x[in.index]; break;
      case Op::kAdd: r = s[in.a] + s[in.b]; break;
      case Op::kSub: r = s[in.a] - s[in.b]; break;
      case Op::kMul: {
        const double a = s[in.a], b = s[in.b];
        r = (a == 0.0 || b == 0.0) ? 0.0 : a * b;
        break;
      }
      case Op::kDiv: r = s[in.a] == 0.0 ? 0.0 : s[in.a] / s[in.b]; break;
      case Op::kNeg: r = -s[in.a]; break;
      case Op::kPow: r = apply_pow(s[in.a], in.value); break;
      case Op::kSin: r = std::sin(s[in.a]); break;
      case Op::kCos: r = std::cos(s[in.a]); break;
      case Op::kExp: r = std::exp(s[in.a]); break;
      case Op::kSqrt: r = std::sqrt(s[in.a]); break;
      case Op::kAbs: r = std::abs(s[in.a]); break;
      case Op::kSign: r = s[in.a] > 0 ? 1.0 : (s[in.a] < 0 ? -1.0 : 0.0); break;
      case Op::kBump: r = bump_profile(in.r1, in.r2, in.index, s[in.a]); break;
    }
    s[k] = r;
  }
}

template <>
void Tape::execute<Jet>(std::span<const Jet> x, std::vector<Jet>& s) const {
  s.resize(code_.size());
  const auto& space = x[0].space_ptr();
  const int order = space->order();
  for (std::size_t k = 0; k < code_.size(); ++k) {
    const Instruction& in = code_[k];
    switch (in.op) {
      case Op::kConst: s[k] = Jet(space, in.value); break;
      case Op::kVar: s[k] = x[in.index]; break;
      case Op::kAdd: s[k] = s[in.a] + s[in.b]; break;
      case Op::kSub: s[k] = s[in.a] - s[in.b]; break;
      case Op::kMul: s[k] = s[in.a] * s[in.b]; break;
      case Op::kDiv: s[k] = s[in.a] / s[in.b]; break;
      case Op::kNeg: s[k] = -s[in.a]; break;
      case Op::kBump:
        s[k] = s[in.a].compose(bump_profile_series(in.r1, in.r2, in.index, order, s[in.a].value()));
        break;
      default:
        s[k] = s[in.a].compose(unary_derivatives(in.op, s[in.a].value(), in.value, order));
        break;
    }
  }
}

void Tape::run(std::span<const double> x, std::span<double> out) const {
  thread_local std::vector<double> slots;
  execute<double>(x, slots);
  for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = slots[outputs_[i]];
}

void Tape::run(std::span<const Jet> x, std::span<Jet> out) const {
  std::vector<Jet> slots;
  execute<Jet>(x, slots);
  for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = slots[outputs_[i]];
}

}  // namespace bracket_reach::fields
