#include "bracket_reach/flow_program.hpp"

#include <cmath>
#include <sstream>

#include "bracket_reach/errors.hpp"

namespace bracket_reach::flows {

Schedule Schedule::plain(double sign) {
  Schedule s;
  s.kind_ = Kind::kPlainT;
  s.sign_ = sign < 0 ? -1.0 : 1.0;
  return s;
}

Schedule Schedule::constant(double value, double delta) {
  Schedule s;
  s.kind_ = Kind::kConst;
  s.value_ = value;
  s.delta_ = delta;
  return s;
}

Schedule Schedule::signed_root(double sign, int root, double offset) {
  if (root < 1) throw InvalidArgument("schedule root order must be >= 1");
  Schedule s;
  s.kind_ = Kind::kSignedRoot;
  s.sign_ = sign < 0 ? -1.0 : 1.0;
  s.root_ = root;
  s.offset_ = offset;
  s.delta_ = offset;
  return s;
}

double Schedule::operator()(double t) const {
  switch (kind_) {
    case Kind::kPlainT:
      return sign_ * t;
    case Kind::kConst:
      return value_;
    case Kind::kSignedRoot: {
      const double u = t + offset_;
      if (root_ == 1) return sign_ * u;
      if (u < 0.0)
        throw ScheduleDomain("signed-root schedule evaluated at t + a = " + std::to_string(u) +
                             " < 0");
      if (root_ == 2) return sign_ * std::sqrt(u);
      if (root_ == 3) return sign_ * std::cbrt(u);
      return sign_ * std::pow(u, 1.0 / root_);
    }
  }
  return 0.0;
}

Schedule Schedule::negated() const {
  Schedule s = *this;
  if (kind_ == Kind::kConst)
    s.value_ = -value_;
  else
    s.sign_ = -sign_;
  return s;
}

std::string Schedule::to_string() const {
  std::ostringstream os;
  os.precision(12);
  const char* sg = sign_ < 0 ? "-" : "+";
  switch (kind_) {
    case Kind::kPlainT:
      os << sg << "t";
      break;
    case Kind::kConst:
      os << value_;
      break;
    case Kind::kSignedRoot:
      os << sg << "(t+" << offset_ << ")^(1/" << root_ << ")";
      break;
  }
  return os.str();
}

FlowProgram::FlowProgram(fields::SpecPtr spec, std::vector<FlowAtom> atoms)
    : spec_(std::move(spec)), atoms_(std::move(atoms)) {
  if (!spec_) throw InvalidArgument("flow program needs a distribution");
  for (const auto& a : atoms_)
    if (a.generator < 1 || a.generator > spec_->generator_count())
      throw IndexOutOfRange("flow atom references generator " + std::to_string(a.generator));
}

FlowProgram FlowProgram::then(const FlowProgram& later) const {
  if (later.spec_ != spec_ && later.spec_ && spec_)
    throw InvalidArgument("cannot concatenate programs over different distributions");
  std::vector<FlowAtom> atoms = atoms_;
  atoms.insert(atoms.end(), later.atoms_.begin(), later.atoms_.end());
  return FlowProgram(spec_ ? spec_ : later.spec_, std::move(atoms));
}

FlowProgram FlowProgram::realized(double t) const {
  std::vector<FlowAtom> atoms;
  atoms.reserve(atoms_.size());
  for (const auto& a : atoms_)
    atoms.push_back({a.generator, Schedule::constant(a.schedule(t), a.schedule.delta())});
  return FlowProgram(spec_, std::move(atoms));
}

std::vector<double> FlowProgram::durations(double t) const {
  std::vector<double> d;
  d.reserve(atoms_.size());
  for (const auto& a : atoms_) d.push_back(a.schedule(t));
  return d;
}

Vector apply_program(const FlowProgram& program, const Vector& x0, double t, double tol) {
  if (program.empty()) return x0;
  const auto durations = program.durations(t);
  const auto& spec = *program.spec();
  Vector x = x0;
  for (std::size_t j = 0; j < program.size(); ++j) {
    const auto& atom = program.atoms()[j];
    try {
      x = integrate_flow(spec.generator(atom.generator), spec.box, x, durations[j], tol);
    } catch (DomainEscape& e) {
      e.atom = j;
      throw;
    } catch (StepUnderflow& e) {
      e.atom = j;
      throw;
    }
  }
  return x;
}

FlowProgram invert_program(const FlowProgram& program) {
  std::vector<FlowAtom> atoms;
  atoms.reserve(program.size());
  for (auto it = program.atoms().rbegin(); it != program.atoms().rend(); ++it)
    atoms.push_back({it->generator, it->schedule.negated()});
  return FlowProgram(program.spec(), std::move(atoms));
}

}  // namespace bracket_reach::flows
