#include "nem/mixture.hpp"

#include <sstream>

namespace nem {

MixtureXi parse_mixture(std::string_view text) {
  std::vector<double> coeffs;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string token(text.substr(pos, comma - pos));
    // strip whitespace
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    if (first == std::string::npos) throw std::invalid_argument("mixture: empty coefficient");
    token = token.substr(first, last - first + 1);
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("mixture: cannot parse '" + token + "'");
    }
    if (used != token.size()) throw std::invalid_argument("mixture: cannot parse '" + token + "'");
    coeffs.push_back(value);
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  return MixtureXi(std::move(coeffs));
}

std::string format_mixture(const MixtureXi& xi) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t k = 0; k < xi.coeffs().size(); ++k) {
    if (k) out << ',';
    out << xi.coeffs()[k];
  }
  return out.str();
}

}  // namespace nem
