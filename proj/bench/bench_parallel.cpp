// Serial reference against OpenMP kernels on the hot loops.

#include <benchmark/benchmark.h>

#include "bracket_reach/commutator.hpp"
#include "bracket_reach/filtration.hpp"
#include "bracket_reach/reach.hpp"
#include "bracket_reach/scenario.hpp"

using namespace bracket_reach;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) ? Execution::kParallel : Execution::kSerial;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

const cli::Scenario& engel() {
  static const auto sc = cli::load_scenario("engel");
  return sc;
}

const cli::Scenario& contact() {
  static const auto sc = cli::load_scenario("contact-perturbed");
  return sc;
}

reach::EndpointMap contact_map() {
  const std::vector<fields::BracketWord> frame{{1}, {2}, {1, 2}};
  return reach::EndpointMap(contact().spec, frame, 0.2, Vector::Zero(3));
}

void BM_FiltrationSweep(benchmark::State& state) {
  const auto& sc = engel();
  const auto samples = filtration::default_samples(sc.box);
  for (auto _ : state)
    benchmark::DoNotOptimize(filtration::analyze(sc.spec, samples, 4, 1e-8, mode(state)));
  label(state);
}

void BM_EndpointJacobian(benchmark::State& state) {
  const auto map = contact_map();
  const Vector s = Vector::Constant(3, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(reach::jacobian_endpoint(map, s, std::nullopt, mode(state)));
  label(state);
}

void BM_TaylorStencil(benchmark::State& state) {
  const auto& sc = engel();
  const Vector x0 = Vector::Constant(4, 0.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        commutator::verify_taylor(sc.spec, {2, 1, 2}, x0, std::nullopt, flows::kDefaultTolerance, mode(state)));
  label(state);
}

void BM_LipschitzPairs(benchmark::State& state) {
  const auto map = contact_map();
  reach::CertificateOptions opts;
  opts.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(reach::certified_radius(map, opts));
  label(state);
}

void BM_Probes(benchmark::State& state) {
  const auto map = contact_map();
  const auto cert = reach::certified_radius(map);
  reach::SteerOptions opts;
  opts.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(reach::probe_certificate(map, cert, 20, 7, 0.9, opts));
  label(state);
}

}  // namespace

BENCHMARK(BM_FiltrationSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EndpointJacobian)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TaylorStencil)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LipschitzPairs)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Probes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
