#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "usparse/error.hpp"
#include "usparse/graph.hpp"

namespace usparse {

namespace {

template <typename T>
bool parse_number(const std::string& token, T& out) {
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

UncertainGraph parse_graph(std::istream& in, ProbabilityDomain domain) {
  static const std::regex header(R"(^\s*#\s*n\s*=\s*(\d+)\s*$)");
  std::optional<std::size_t> declared_n;
  std::vector<Edge> edges;
  std::size_t max_id_plus_one = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::smatch match;
    if (edges.empty() && !declared_n && std::regex_match(line, match, header)) {
      declared_n = std::stoull(match[1].str());
      continue;
    }
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<std::string> fields;
    for (std::string t; tokens >> t;) fields.push_back(t);
    if (fields.empty()) continue;
    if (fields.size() != 3) {
      throw DomainError(fmt::format("line {}: expected 'u v p', got {} fields", line_no,
                                    fields.size()));
    }
    Edge e{};
    if (!parse_number(fields[0], e.u) || !parse_number(fields[1], e.v)) {
      throw DomainError(fmt::format("line {}: vertex ids must be non-negative integers", line_no));
    }
    if (!parse_number(fields[2], e.p)) {
      throw DomainError(fmt::format("line {}: cannot parse probability '{}'", line_no, fields[2]));
    }
    try {
      // Validate per line so the error carries the line number.
      UncertainGraph probe(std::max(e.u, e.v) + std::size_t{1}, {e}, domain);
    } catch (const DomainError& err) {
      throw DomainError(fmt::format("line {}: {}", line_no, err.what()));
    }
    max_id_plus_one = std::max<std::size_t>(max_id_plus_one, std::max(e.u, e.v) + std::size_t{1});
    edges.push_back(e);
  }
  const std::size_t n = declared_n.value_or(max_id_plus_one);
  if (n < max_id_plus_one) {
    throw DomainError(fmt::format("header declares n={} but vertex {} appears", n,
                                  max_id_plus_one - 1));
  }
  return UncertainGraph(n, std::move(edges), domain);
}

UncertainGraph load_graph(const std::string& path, ProbabilityDomain domain) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  try {
    return parse_graph(in, domain);
  } catch (const DomainError& err) {
    throw DomainError(fmt::format("{}: {}", path, err.what()));
  }
}

void write_graph(std::ostream& out, const UncertainGraph& g) {
  fmt::print(out, "# n={}\n", g.vertex_count());
  for (const auto& e : g.edges()) fmt::print(out, "{} {} {}\n", e.u, e.v, e.p);
}

void save_graph(const std::string& path, const UncertainGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path));
  write_graph(out, g);
  if (!out) throw IoError(fmt::format("write to '{}' failed", path));
}

}  // namespace usparse
