#include "clpds/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace clpds {

const char* const kSeriesHeader = "t,x,y,chi,vx,vy,vz,wx,wy,wz,ax,ay,az";

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& tok, const std::filesystem::path& path,
                    std::size_t lineno) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    std::ostringstream msg;
    msg << path.string() << ":" << lineno << ": malformed number '" << tok
        << "'";
    throw std::runtime_error(msg.str());
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  return f;
}

}  // namespace

void write_series_csv(const std::filesystem::path& path, const Series& series) {
  auto f = open_out(path);
  f << kSeriesHeader << "\n";
  for (const auto& s : series) {
    f << format_double(s.t) << ',' << format_double(s.f.x) << ','
      << format_double(s.f.y) << ',' << format_double(s.f.chi);
    for (int i = 0; i < 3; ++i) f << ',' << format_double(s.u.v[i]);
    for (int i = 0; i < 3; ++i) f << ',' << format_double(s.u.omega[i]);
    for (int i = 0; i < 3; ++i) f << ',' << format_double(s.u.v_dot[i]);
    f << '\n';
  }
}

Series read_series_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path.string());

  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path.string() + ": empty file");
  auto cols = split(line, ',');
  const bool has_chi =
      std::find(cols.begin(), cols.end(), "chi") != cols.end();
  const std::size_t expect = has_chi ? 13 : 12;
  if (cols.size() != expect)
    throw std::runtime_error(path.string() + ":1: unexpected header '" + line +
                             "'");

  Series out;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto toks = split(line, ',');
    if (toks.size() != expect) {
      std::ostringstream msg;
      msg << path.string() << ":" << lineno << ": expected " << expect
          << " fields, got " << toks.size();
      throw std::runtime_error(msg.str());
    }
    Sample s;
    std::size_t i = 0;
    s.t = parse_double(toks[i++], path, lineno);
    s.f.x = parse_double(toks[i++], path, lineno);
    s.f.y = parse_double(toks[i++], path, lineno);
    s.f.chi = has_chi ? parse_double(toks[i++], path, lineno)
                      : std::numeric_limits<double>::quiet_NaN();
    for (int j = 0; j < 3; ++j) s.u.v[j] = parse_double(toks[i++], path, lineno);
    for (int j = 0; j < 3; ++j)
      s.u.omega[j] = parse_double(toks[i++], path, lineno);
    for (int j = 0; j < 3; ++j)
      s.u.v_dot[j] = parse_double(toks[i++], path, lineno);
    s.u.t = s.t;
    out.push_back(s);
  }
  return out;
}

void write_table_csv(const std::filesystem::path& path, const Table& table) {
  auto f = open_out(path);
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    f << (i ? "," : "") << table.columns[i];
  f << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      f << (i ? "," : "") << format_double(row[i]);
    f << '\n';
  }
}

Table read_table_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  Table t;
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path.string() + ": empty file");
  t.columns = split(line, ',');
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto toks = split(line, ',');
    std::vector<double> row;
    row.reserve(toks.size());
    for (const auto& tok : toks) row.push_back(parse_double(tok, path, lineno));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_kv_file(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& kv) {
  auto f = open_out(path);
  for (const auto& [k, v] : kv) f << k << " = " << v << '\n';
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[4096];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    const std::streamsize n = f.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
    if (!f) break;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace clpds
