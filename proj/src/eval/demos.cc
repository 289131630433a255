#include "mirlab/eval/demos.h"

#include <stdexcept>
#include <string>

#include "mirlab/common/errors.h"
#include "mirlab/common/parallel.h"
#include "mirlab/common/rng.h"
#include "mirlab/sim/scripted.h"

namespace mirlab::eval {

namespace {

constexpr int kMaxAttempts = 50;

std::uint64_t demo_seed(std::uint64_t seed, int id, int attempt) {
  return mix_seed(mix_seed(mix_seed(seed, 0xde70), static_cast<std::uint64_t>(id)),
                  static_cast<std::uint64_t>(attempt));
}

bool try_demo(Demo& d, const sim::DomainSpec& canonical) {
  const auto task = d.task();
  const auto params = sim::sample_script_params(d.seed);
  const auto& dyn = d.spec.dynamics;
  auto state = sim::reset(task, d.seed);
  d.initial = state;
  const auto n = static_cast<std::size_t>(d.length);
  d.frames.assign(n * sim::kObservationBytes, 0);
  d.canonical_frames.assign(n * sim::kObservationBytes, 0);
  for (int t = 0; t < d.length; ++t) {
    const auto offset = static_cast<std::size_t>(t) * sim::kObservationBytes;
    const auto fseed = mix_seed(d.seed, static_cast<std::uint64_t>(t));
    for (std::size_t v = 0; v < sim::kViews; ++v) {
      const auto vo = offset + v * sim::kViewPixels;
      sim::render_view(state, d.spec, v, fseed, std::span<std::uint8_t>(d.frames).subspan(vo, sim::kViewPixels));
      sim::render_view(state, canonical, v, fseed,
                       std::span<std::uint8_t>(d.canonical_frames).subspan(vo, sim::kViewPixels));
    }
    state = sim::step(state, sim::scripted_policy(state, task, params, dyn), dyn);
  }
  return sim::success_predicates(state, task, dyn).stacked;
}

}  // namespace

std::vector<sim::DomainKind> demo_domains() {
  return {sim::DomainKind::kInvisibleArm, sim::DomainKind::kStick, sim::DomainKind::kBlobHand};
}

Demo make_demo(sim::DomainKind domain, int id, std::uint64_t seed, int length) {
  if (id < 0) throw ContractError("make_demo: id must be non-negative");
  if (length < 10) throw ContractError("make_demo: length must be at least 10");
  const auto canonical = sim::canonical_domain();
  Demo d;
  d.id = id;
  d.task_id = id % 6;
  d.length = length;
  d.domain = domain;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    d.seed = demo_seed(seed, id, attempt);
    d.spec = sim::sample_domain_spec(domain, mix_seed(d.seed, 0xd0));
    if (try_demo(d, canonical)) return d;
  }
  throw std::runtime_error("make_demo: no stacked episode for demo " + std::to_string(id) + " after " +
                           std::to_string(kMaxAttempts) + " seeds");
}

std::vector<Demo> make_demos(sim::DomainKind domain, int count, std::uint64_t seed, int length) {
  if (count < 1) throw ContractError("make_demos: count must be positive");
  std::vector<Demo> out(static_cast<std::size_t>(count));
  parallel_for(out.size(), [&](std::size_t i) { out[i] = make_demo(domain, static_cast<int>(i), seed, length); });
  return out;
}

}  // namespace mirlab::eval
