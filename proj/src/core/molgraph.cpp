#include "molgraph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "error.hpp"

namespace gvpnn {

using nlohmann::json;

ElementVocab::ElementVocab(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    require(!symbols_[i].empty(), "ElementVocab: empty symbol");
    for (std::size_t j = i + 1; j < symbols_.size(); ++j)
      require(symbols_[i] != symbols_[j], "ElementVocab: duplicate symbol " + symbols_[i]);
  }
}

ElementVocab ElementVocab::default_vocab() {
  return ElementVocab({"H", "C", "N", "O", "F", "P", "S", "Cl", "Se", "Br", "I"});
}

int ElementVocab::index_of(const std::string& symbol) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i)
    if (symbols_[i] == symbol) return int(i);
  return int(symbols_.size());  // "other" bucket
}

Tensor MolGraph::node_onehot(int i) const {
  Tensor t(vocab.onehot_width(), 1);
  t(element_index[std::size_t(i)], 0) = 1.0;
  return t;
}

Tensor MolGraph::edge_unit_tensor(int e) const {
  const auto& u = edges[std::size_t(e)].unit;
  Tensor t(1, 3);
  t(0, 0) = u[0];
  t(0, 1) = u[1];
  t(0, 2) = u[2];
  return t;
}

Tensor MolGraph::edge_scalar_tensor(int e) const {
  return Tensor::column(edges[std::size_t(e)].rbf);
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  fail(Errc::parse, "xyz parse error at line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<AtomRecord> parse_xyz(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  if (lines.empty()) parse_fail(1, "empty input");
  long count = 0;
  {
    auto toks = split_ws(lines[0]);
    if (toks.size() != 1) parse_fail(1, "expected atom count");
    auto [ptr, ec] = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), count);
    if (ec != std::errc() || ptr != toks[0].data() + toks[0].size())
      parse_fail(1, "atom count is not an integer");
  }
  if (count <= 0) parse_fail(1, "atom count must be positive");
  if (lines.size() < 2) parse_fail(2, "missing comment line");

  std::vector<AtomRecord> atoms;
  atoms.reserve(std::size_t(count));
  for (long i = 0; i < count; ++i) {
    const int line_no = int(i) + 3;
    if (std::size_t(line_no - 1) >= lines.size())
      parse_fail(line_no, "expected " + std::to_string(count) + " atoms, file ends early");
    auto toks = split_ws(lines[std::size_t(line_no - 1)]);
    if (toks.size() < 4 || toks.size() > 5) parse_fail(line_no, "expected 'symbol x y z [tag]'");
    AtomRecord atom;
    atom.element = toks[0];
    for (int c = 0; c < 3; ++c)
      if (!parse_double(toks[std::size_t(c) + 1], atom.pos[std::size_t(c)]))
        parse_fail(line_no, "malformed coordinate '" + toks[std::size_t(c) + 1] + "'");
    if (!std::isfinite(atom.pos[0]) || !std::isfinite(atom.pos[1]) || !std::isfinite(atom.pos[2]))
      parse_fail(line_no, "non-finite coordinate");
    if (toks.size() == 5) {
      if (toks[4] == "1")
        atom.readout_tag = true;
      else if (toks[4] == "0")
        atom.readout_tag = false;
      else
        parse_fail(line_no, "readout tag must be 0 or 1");
    }
    atoms.push_back(std::move(atom));
  }
  for (std::size_t k = std::size_t(count) + 2; k < lines.size(); ++k)
    if (!split_ws(lines[k]).empty()) parse_fail(int(k) + 1, "unexpected content after atom list");
  return atoms;
}

std::vector<AtomRecord> strip_hydrogens(std::vector<AtomRecord> atoms) {
  auto is_h = [](const std::string& sym) {
    return sym.size() == 1 && (sym[0] == 'H' || sym[0] == 'h');
  };
  std::erase_if(atoms, [&](const AtomRecord& a) { return is_h(a.element); });
  return atoms;
}

std::vector<std::pair<int, int>> build_radius_graph(const std::vector<AtomRecord>& atoms,
                                                    double cutoff) {
  require(!atoms.empty(), "build_radius_graph: empty atom list");
  require(cutoff > 0.0, "build_radius_graph: cutoff must be positive");
  const int n = int(atoms.size());

  // Cell binning at the cutoff length; candidate pairs come from the 27
  // neighboring cells.
  std::map<std::array<long, 3>, std::vector<int>> cells;
  auto cell_of = [&](int i) {
    std::array<long, 3> c;
    for (int d = 0; d < 3; ++d) c[std::size_t(d)] = long(std::floor(atoms[std::size_t(i)].pos[std::size_t(d)] / cutoff));
    return c;
  };
  for (int i = 0; i < n; ++i) cells[cell_of(i)].push_back(i);

  const double cut2 = cutoff * cutoff;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    const auto base = cell_of(i);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          auto it = cells.find({base[0] + dx, base[1] + dy, base[2] + dz});
          if (it == cells.end()) continue;
          for (int j : it->second) {
            if (j <= i) continue;
            double d2 = 0.0;
            for (int d = 0; d < 3; ++d) {
              const double diff = atoms[std::size_t(i)].pos[std::size_t(d)] - atoms[std::size_t(j)].pos[std::size_t(d)];
              d2 += diff * diff;
            }
            if (d2 < cut2) {
              edges.emplace_back(i, j);
              edges.emplace_back(j, i);
            }
          }
        }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<double> rbf_encode(double d, double d_min, double d_max, int count) {
  require(d >= 0.0, "rbf_encode: distance must be non-negative");
  require(count >= 2 && d_max > d_min, "rbf_encode: need at least two centers and d_max > d_min");
  const double span = d_max - d_min;
  const double gamma = span / double(count);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double mu = d_min + double(k) * span / double(count - 1);
    const double z = (d - mu) / gamma;
    out[std::size_t(k)] = std::exp(-0.5 * z * z);
  }
  return out;
}

MolGraph featurize(std::vector<AtomRecord> atoms, ElementVocab vocab, double cutoff,
                   int rbf_count) {
  require(!atoms.empty(), "featurize: empty atom list");
  MolGraph g{std::move(atoms), std::move(vocab), cutoff, rbf_count, {}, {}};
  g.element_index.reserve(g.atoms.size());
  for (const auto& atom : g.atoms) {
    require(!atom.element.empty(), "featurize: empty element symbol");
    require(std::isfinite(atom.pos[0]) && std::isfinite(atom.pos[1]) && std::isfinite(atom.pos[2]),
            "featurize: non-finite coordinates");
    g.element_index.push_back(g.vocab.index_of(atom.element));
  }
  auto pairs = build_radius_graph(g.atoms, cutoff);
  g.edges.reserve(pairs.size());
  for (auto [src, dst] : pairs) {
    GraphEdge e;
    e.src = src;
    e.dst = dst;
    double d2 = 0.0;
    for (int d = 0; d < 3; ++d) {
      e.unit[std::size_t(d)] = g.atoms[std::size_t(dst)].pos[std::size_t(d)] - g.atoms[std::size_t(src)].pos[std::size_t(d)];
      d2 += e.unit[std::size_t(d)] * e.unit[std::size_t(d)];
    }
    e.dist = std::sqrt(d2);
    if (e.dist < 1e-6)
      fail(Errc::invalid_argument, "featurize: coincident atoms " + std::to_string(src) + " and " +
                                       std::to_string(dst) + " (unit vector undefined)");
    for (int d = 0; d < 3; ++d) e.unit[std::size_t(d)] /= e.dist;
    e.rbf = rbf_encode(e.dist, 0.0, cutoff, rbf_count);
    g.edges.push_back(std::move(e));
  }
  return g;
}

std::string graph_to_json(const MolGraph& graph) {
  json nodes = json::array();
  for (const auto& atom : graph.atoms) {
    nodes.push_back({{"element", atom.element},
                     {"pos", {atom.pos[0], atom.pos[1], atom.pos[2]}},
                     {"readout", atom.readout_tag}});
  }
  json j{{"version", 1},
         {"cutoff", graph.cutoff},
         {"vocab", graph.vocab.symbols()},
         {"nodes", std::move(nodes)}};
  return j.dump(2);
}

MolGraph graph_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(Errc::parse, std::string("graph json: ") + e.what());
  }
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) fail(Errc::parse, std::string("graph json: missing key /") + key);
    return j.at(key);
  };
  const json& version = need("version");
  if (!version.is_number_integer() || version.get<int>() != 1)
    fail(Errc::parse, "graph json: unsupported version (expected 1)");
  const json& cutoff = need("cutoff");
  const json& vocab = need("vocab");
  const json& nodes = need("nodes");
  try {
    std::vector<AtomRecord> atoms;
    for (const auto& node : nodes) {
      AtomRecord atom;
      atom.element = node.at("element").get<std::string>();
      const auto& pos = node.at("pos");
      if (!pos.is_array() || pos.size() != 3) fail(Errc::parse, "graph json: /nodes pos must have 3 entries");
      for (int d = 0; d < 3; ++d) atom.pos[std::size_t(d)] = pos.at(std::size_t(d)).get<double>();
      atom.readout_tag = node.value("readout", false);
      atoms.push_back(std::move(atom));
    }
    return featurize(std::move(atoms), ElementVocab(vocab.get<std::vector<std::string>>()),
                     cutoff.get<double>());
  } catch (const json::exception& e) {
    fail(Errc::parse, std::string("graph json: ") + e.what());
  }
}

void save_graph(const MolGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot open for writing: " + path);
  out << graph_to_json(graph) << '\n';
  if (!out) fail(Errc::io, "write failed: " + path);
}

MolGraph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return graph_from_json(ss.str());
}

}  // namespace gvpnn
