#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "usparse/error.hpp"
#include "usparse/graph.hpp"

namespace usparse {

double ProbabilitySampler::operator()(Rng& rng) const {
  switch (kind) {
    case Kind::Constant:
      return a;
    case Kind::Uniform: {
      // (a, b] so that a = 0 never yields a zero probability.
      return b - (b - a) * rng.uniform();
    }
    case Kind::TruncatedExponential: {
      for (;;) {
        const double x = -a * std::log1p(-rng.uniform());
        if (x > 0.0 && x <= 1.0) return x;
      }
    }
  }
  return a;
}

ProbabilitySampler ProbabilitySampler::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  auto number = [&](std::size_t i) {
    try {
      return std::stod(parts.at(i));
    } catch (const std::exception&) {
      throw DomainError(fmt::format("bad probability sampler '{}'", text));
    }
  };
  ProbabilitySampler s;
  if (parts[0] == "const" && parts.size() == 2) {
    s = {Kind::Constant, number(1), 0.0};
    if (!(s.a > 0.0 && s.a <= 1.0)) throw DomainError("const probability must be in (0,1]");
  } else if (parts[0] == "uniform" && parts.size() == 3) {
    s = {Kind::Uniform, number(1), number(2)};
    if (!(s.a >= 0.0 && s.a < s.b && s.b <= 1.0)) {
      throw DomainError("uniform sampler needs 0 <= lo < hi <= 1");
    }
  } else if (parts[0] == "exp" && parts.size() == 2) {
    s = {Kind::TruncatedExponential, number(1), 0.0};
    if (!(s.a > 0.0)) throw DomainError("exponential mean must be positive");
  } else {
    throw DomainError(fmt::format("bad probability sampler '{}'", text));
  }
  return s;
}

std::string ProbabilitySampler::to_string() const {
  switch (kind) {
    case Kind::Constant:
      return fmt::format("const:{}", a);
    case Kind::Uniform:
      return fmt::format("uniform:{}:{}", a, b);
    case Kind::TruncatedExponential:
      return fmt::format("exp:{}", a);
  }
  return {};
}

std::size_t synthetic_edge_target(std::size_t n, double target_density) {
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  // Guard against 0.15 * 4950 = 742.5000000000001 style noise before ceil.
  const double raw = target_density * pairs;
  const double rounded = std::nearbyint(raw);
  if (std::fabs(raw - rounded) < 1e-9 * std::max(1.0, raw)) return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(raw));
}

UncertainGraph generate_synthetic(std::size_t n, double target_density,
                                  const ProbabilitySampler& sampler, std::uint64_t seed) {
  if (!(target_density > 0.0 && target_density <= 1.0)) {
    throw DomainError("target density must be in (0,1]");
  }
  if (n < 2) throw DomainError("synthetic graphs need at least two vertices");
  const std::size_t target = synthetic_edge_target(n, target_density);
  if (target < n - 1) {
    throw DomainError(fmt::format("density {} gives {} edges, below the {} needed for connectivity",
                                  target_density, target, n - 1));
  }
  Rng rng(seed);
  std::unordered_set<std::uint64_t> used;
  std::vector<Edge> edges;
  edges.reserve(target);
  auto key = [n](VertexId u, VertexId v) {
    if (u > v) std::swap(u, v);
    return static_cast<std::uint64_t>(u) * n + v;
  };
  auto add = [&](VertexId u, VertexId v) {
    used.insert(key(u, v));
    edges.push_back({std::min(u, v), std::max(u, v), sampler(rng)});
  };

  // Random recursive tree over a random vertex order.
  std::vector<VertexId> order(n);
  for (VertexId i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order.begin(), order.end());
  for (std::size_t i = 1; i < n; ++i) add(order[i], order[rng.below(i)]);

  const std::size_t all_pairs = n * (n - 1) / 2;
  if (2 * target > all_pairs) {
    std::vector<std::pair<VertexId, VertexId>> rest;
    rest.reserve(all_pairs - edges.size());
    for (VertexId u = 0; u < n; ++u) {
      for (VertexId v = u + 1; v < n; ++v) {
        if (!used.contains(key(u, v))) rest.emplace_back(u, v);
      }
    }
    rng.shuffle(rest.begin(), rest.end());
    for (std::size_t i = 0; edges.size() < target; ++i) add(rest[i].first, rest[i].second);
  } else {
    while (edges.size() < target) {
      const auto u = static_cast<VertexId>(rng.below(n));
      const auto v = static_cast<VertexId>(rng.below(n));
      if (u != v && !used.contains(key(u, v))) add(u, v);
    }
  }
  return UncertainGraph(n, std::move(edges));
}

}  // namespace usparse
