#include "tcmerton/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tcmerton/errors.hpp"

namespace tcm {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_fields_csv(const fs::path& path, std::span<const NamedField> fields) {
  if (fields.empty()) throw ValidationError("fields", "nothing to write");
  const Grid& g = fields.front().field->grid();
  std::string s = "t,y";
  for (const auto& f : fields) {
    if (!(f.field->grid() == g)) throw ValidationError(f.name, "grid differs from the first field");
    s += "," + f.name;
  }
  s += "\n";
  for (std::size_t i = 0; i < g.n_t(); ++i)
    for (std::size_t k = 0; k < g.n_y(); ++k) {
      s += format_double(g.t(i));
      s += ',';
      s += format_double(g.y(k));
      for (const auto& f : fields) {
        s += ',';
        s += format_double((*f.field)(i, k));
      }
      s += '\n';
    }
  write_text_file(path, s);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  return out;
}

double parse(const std::string& s, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    std::ostringstream os;
    os << path.string() << ":" << line << ": bad number '" << s << "'";
    throw IntegrityError(os.str());
  }
  return v;
}

}  // namespace

ScalarField2D read_field_csv(const fs::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IntegrityError(path.string() + ": empty file");
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "y")
    throw IntegrityError(path.string() + ": header must start with t,y");
  std::size_t col = 0;
  for (std::size_t c = 2; c < header.size(); ++c)
    if (header[c] == column) col = c;
  if (col == 0) throw IntegrityError(path.string() + ": no column '" + column + "'");

  std::vector<double> ts, ys, vals;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << path.string() << ":" << lineno << ": expected " << header.size() << " columns";
      throw IntegrityError(os.str());
    }
    ts.push_back(parse(cells[0], path, lineno));
    ys.push_back(parse(cells[1], path, lineno));
    vals.push_back(parse(cells[col], path, lineno));
  }
  std::size_t ny = 0;
  while (ny < ts.size() && ts[ny] == ts[0]) ++ny;
  if (ny < 2 || ts.size() % ny != 0) throw IntegrityError(path.string() + ": not a tensor grid");
  const std::size_t nt = ts.size() / ny;
  if (nt < 2) throw IntegrityError(path.string() + ": need at least two time rows");
  const Grid g(ts.back(), nt, ys.front(), ys[ny - 1], ny);
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t k = 0; k < ny; ++k) {
      const std::size_t n = i * ny + k;
      const double tol_t = 1e-9 * std::max(1.0, g.horizon());
      const double tol_y = 1e-9 * std::max(1.0, std::abs(g.y(k)));
      if (std::abs(ts[n] - g.t(i)) > tol_t || std::abs(ys[n] - g.y(k)) > tol_y) {
        std::ostringstream os;
        os << path.string() << ": node " << n << " is off the uniform grid";
        throw IntegrityError(os.str());
      }
    }
  return ScalarField2D(g, std::move(vals));
}

void write_strategy_csv(const fs::path& path, const Solution& sol) {
  const NamedField f[] = {{"pbar", &sol.pbar.pbar},
                          {"pi_star", &sol.controls.pi_star},
                          {"c_star", &sol.controls.c_star}};
  write_fields_csv(path, f);
}

void write_value_csv(const fs::path& path, std::span<const ValueRow> rows) {
  std::string s = "t,x,y,G,v\n";
  for (const auto& r : rows) {
    s += format_double(r.t) + ',' + format_double(r.x) + ',' + format_double(r.y) + ',' +
         format_double(r.g) + ',' + format_double(r.v) + '\n';
  }
  write_text_file(path, s);
}

void write_paths_csv(const fs::path& path, const PathEnsemble& ens) {
  if (!ens.has_wealth()) throw ValidationError("paths", "ensemble has no wealth paths");
  const std::size_t w = ens.n_steps + 1;
  std::string s = "path,time,y,x,c,pi\n";
  for (std::size_t p = 0; p < ens.n_paths; ++p)
    for (std::size_t n = 0; n < w; ++n) {
      const std::size_t k = p * w + n;
      s += std::to_string(p) + ',' + format_double(ens.time(n)) + ',' + format_double(ens.y[k]) +
           ',' + format_double(ens.x[k]) + ',' + format_double(ens.c[k]) + ',' +
           format_double(ens.pi[k]) + '\n';
    }
  write_text_file(path, s);
}

}  // namespace tcm
