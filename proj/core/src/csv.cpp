#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "ecobounds/data_model.hpp"
#include "ecobounds/error.hpp"
#include "ecobounds/rng.hpp"

namespace ecobounds {

namespace {

std::vector<std::string> parse_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

bool is_missing(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

// Returns nullopt for a missing cell; throws on a non-numeric one.
std::optional<double> parse_cell(const std::string& raw, std::size_t row, const std::string& column) {
  const std::string s = trim(raw);
  if (is_missing(s)) return std::nullopt;
  double value = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw DataError("non-numeric cell '" + s + "' at row " + std::to_string(row) + ", column " + column);
  }
  return value;
}

bool looks_discrete(const std::vector<double>& values) {
  std::set<double> distinct;
  for (double x : values) {
    if (x != std::floor(x)) return false;
    distinct.insert(x);
    if (distinct.size() > 10) return false;
  }
  return true;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

IngestResult ingest_csv(std::istream& in, const IngestConfig& config) {
  if (!(config.bounds.a < config.bounds.b)) throw ConfigError("outcome bounds require a < b");
  if (config.v.empty()) throw ConfigError("role map needs at least one V column");
  if (config.w.empty()) throw ConfigError("role map needs at least one W column");

  std::vector<std::string> roles = config.v;
  roles.insert(roles.end(), config.w.begin(), config.w.end());
  roles.push_back(config.a);
  roles.push_back(config.y);
  if (config.e) roles.push_back(*config.e);
  {
    std::set<std::string> seen;
    for (const auto& r : roles) {
      if (!seen.insert(r).second) throw ConfigError("column '" + r + "' is assigned more than one role");
    }
  }

  std::string line;
  if (!std::getline(in, line)) throw DataError("no data rows");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = parse_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;
  std::vector<std::string> missing_cols;
  for (const auto& r : roles) {
    if (!col.count(r)) missing_cols.push_back(r);
  }
  if (!missing_cols.empty()) {
    std::string msg = "unknown column(s) in role map:";
    for (const auto& m : missing_cols) msg += " " + m;
    throw ConfigError(msg);
  }

  struct Row {
    std::vector<std::optional<double>> v, w;
    std::optional<double> e, a, y;
  };
  std::vector<Row> rows;
  std::size_t rows_read = 0;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    ++rows_read;
    const auto cells = parse_line(line);
    auto cell = [&](const std::string& name) -> std::optional<double> {
      const std::size_t j = col.at(name);
      if (j >= cells.size()) return std::nullopt;
      return parse_cell(cells[j], row_no, name);
    };
    Row r;
    for (const auto& name : config.v) r.v.push_back(cell(name));
    for (const auto& name : config.w) r.w.push_back(cell(name));
    r.a = cell(config.a);
    r.y = cell(config.y);
    if (config.e) r.e = cell(*config.e);
    rows.push_back(std::move(r));
  }
  if (rows_read == 0) throw DataError("no data rows");

  auto all_present = [](const std::vector<std::optional<double>>& xs) {
    return std::all_of(xs.begin(), xs.end(), [](const auto& x) { return x.has_value(); });
  };

  std::vector<Row> kept;
  std::vector<bool> is_target;
  for (auto& r : rows) {
    bool ok = all_present(r.v);
    if (config.e) {
      if (!r.e) {
        ok = false;
      } else if (*r.e != 0.0 && *r.e != 1.0) {
        throw DataError("population column must be 0/1");
      } else if (*r.e == 1.0) {
        ok = ok && r.a && r.y;
      } else {
        ok = ok && all_present(r.w);
      }
    } else {
      ok = ok && all_present(r.w) && r.a && r.y;
    }
    if (!ok) continue;
    if (config.e) is_target.push_back(*r.e == 0.0);
    kept.push_back(std::move(r));
  }
  if (!config.e) {
    if (!(config.target_fraction > 0.0 && config.target_fraction < 1.0)) {
      throw ConfigError("target fraction must lie in (0,1)");
    }
    const std::size_t n = kept.size();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(config.target_seed);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
    const auto nt = static_cast<std::size_t>(std::llround(config.target_fraction * static_cast<double>(n)));
    is_target.assign(n, false);
    for (std::size_t i = 0; i < nt; ++i) is_target[perm[i]] = true;
  }

  IngestResult out;
  out.rows_read = rows_read;
  out.rows_dropped = rows_read - kept.size();
  Dataset& d = out.dataset;
  d.bounds = config.bounds;
  d.columns.v_names = config.v;
  d.columns.w_names = config.w;

  std::vector<WLevel> observed;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (!is_target[i]) continue;
    WLevel lv;
    for (const auto& x : kept[i].w) lv.push_back(*x);
    observed.push_back(std::move(lv));
  }
  if (config.w_levels) {
    d.w_support = WSupport(*config.w_levels);
  } else {
    d.w_support = WSupport::from_observed(observed);
  }

  const std::size_t p = config.v.size();
  d.columns.v_discrete.assign(p, false);
  for (std::size_t j = 0; j < p; ++j) {
    if (config.discrete) {
      d.columns.v_discrete[j] =
          std::find(config.discrete->begin(), config.discrete->end(), config.v[j]) != config.discrete->end();
    } else {
      std::vector<double> values;
      values.reserve(kept.size());
      for (const auto& r : kept) values.push_back(*r.v[j]);
      d.columns.v_discrete[j] = !values.empty() && looks_discrete(values);
    }
  }

  d.samples.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const Row& r = kept[i];
    ObservedSample s;
    s.v.resize(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) s.v[static_cast<Eigen::Index>(j)] = *r.v[j];
    s.e = !is_target[i];
    if (s.e) {
      if (*r.a != 0.0 && *r.a != 1.0) throw DataError("treatment column must be 0/1");
      s.a = static_cast<int>(*r.a);
      s.y = *r.y;
    } else {
      WLevel lv;
      for (const auto& x : r.w) lv.push_back(*x);
      const auto idx = d.w_support.find(lv);
      if (!idx) throw DataError("target row W level missing from declared support");
      s.w = *idx;
    }
    d.samples.push_back(std::move(s));
  }
  require_valid(d);
  return out;
}

IngestResult ingest_csv_file(const std::string& path, const IngestConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return ingest_csv(in, config);
}

void write_dataset_csv(const Dataset& d, std::ostream& out) {
  bool first = true;
  auto sep = [&]() {
    if (!first) out << ',';
    first = false;
  };
  for (const auto& n : d.columns.v_names) {
    sep();
    out << n;
  }
  for (const auto& n : d.columns.w_names) {
    sep();
    out << n;
  }
  out << ",population,treatment,outcome\n";
  for (const auto& s : d.samples) {
    first = true;
    for (Eigen::Index j = 0; j < s.v.size(); ++j) {
      sep();
      out << format_double(s.v[j]);
    }
    for (std::size_t j = 0; j < d.columns.w_names.size(); ++j) {
      sep();
      if (s.w) out << format_double(d.w_support.level(*s.w)[j]);
    }
    out << ',' << (s.e ? 1 : 0) << ',';
    if (s.a) out << *s.a;
    out << ',';
    if (s.y) out << format_double(*s.y);
    out << '\n';
  }
}

IngestConfig roundtrip_config(const Dataset& d) {
  IngestConfig c;
  c.v = d.columns.v_names;
  c.w = d.columns.w_names;
  c.e = "population";
  c.a = "treatment";
  c.y = "outcome";
  c.bounds = d.bounds;
  std::vector<std::string> discrete;
  for (std::size_t j = 0; j < d.columns.v_names.size(); ++j) {
    if (d.columns.v_discrete[j]) discrete.push_back(d.columns.v_names[j]);
  }
  c.discrete = discrete;
  c.w_levels = d.w_support.levels();
  return c;
}

}  // namespace ecobounds
