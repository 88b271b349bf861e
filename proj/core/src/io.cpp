#include "ripple/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ripple {

void write_grid_csv(const std::string& path, const GridFunction& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << "x,re,im\n";
  for (std::size_t j = 0; j < f.size(); ++j)
    out << f.x(j) << ',' << f[j].real() << ',' << f[j].imag() << '\n';
}

GridFunction read_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "x,re,im") throw std::runtime_error("unexpected CSV header in " + path);
  std::vector<double> xs;
  cvec vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    xs.push_back(std::stod(a));
    vals.emplace_back(std::stod(b), std::stod(c));
  }
  if (xs.size() < 2) throw std::runtime_error("too few rows in " + path);
  const double length = static_cast<double>(xs.size()) * (xs[1] - xs[0]);
  return GridFunction(length, std::move(vals));
}

std::string grid_manifest_json(const GridFunction& f) {
  nlohmann::ordered_json j;
  j["n_points"] = f.size();
  j["domain_length"] = f.length();
  return j.dump(2);
}

void write_grid_manifest(const std::string& path, const GridFunction& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << grid_manifest_json(f) << '\n';
}

}  // namespace ripple
