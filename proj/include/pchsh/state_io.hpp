// Copyright 2026 The pchsh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON state files:
//   {"num_qubits": n, "re": [[...], ...], "im": [[...], ...]}
// with row-major 2^n x 2^n arrays and 17 significant digits per number.

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "pchsh/errors.hpp"
#include "pchsh/pauli.hpp"

namespace pchsh {

namespace detail {
inline std::string format_double17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline std::string state_to_json(const DensityMatrix& rho) {
  std::ostringstream os;
  os << "{\"num_qubits\": " << rho.num_qubits() << ",\n";
  for (int part = 0; part < 2; ++part) {
    os << (part == 0 ? " \"re\": [" : " \"im\": [");
    for (Eigen::Index i = 0; i < rho.dim(); ++i) {
      os << (i == 0 ? "\n  [" : ",\n  [");
      for (Eigen::Index j = 0; j < rho.dim(); ++j) {
        const double v = part == 0 ? rho(i, j).real() : rho(i, j).imag();
        os << (j == 0 ? "" : ", ") << detail::format_double17(v);
      }
      os << "]";
    }
    os << (part == 0 ? "\n ],\n" : "\n ]\n");
  }
  os << "}\n";
  return os.str();
}

/// Parses and validates a state. Throws ParseError for malformed JSON or
/// shapes and ValidationError for invariant violations.
inline DensityMatrix state_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("state file: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("num_qubits") || !doc.contains("re") ||
      !doc.contains("im"))
    throw ParseError("state file: expected keys num_qubits, re, im");
  if (!doc["num_qubits"].is_number_integer())
    throw ParseError("state file: num_qubits must be an integer");
  const int n = doc["num_qubits"].get<int>();
  if (n != 3 && n != 4)
    throw ParseError("state file: num_qubits must be 3 or 4");
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix m(dim, dim);
  for (int part = 0; part < 2; ++part) {
    const char* key = part == 0 ? "re" : "im";
    const auto& rows = doc[key];
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != dim) {
      std::ostringstream os;
      os << "state file: \"" << key << "\" must have " << dim << " rows";
      throw ParseError(os.str());
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
        std::ostringstream os;
        os << "state file: \"" << key << "\" row " << i << " must have " << dim
           << " entries";
        throw ParseError(os.str());
      }
      for (Eigen::Index j = 0; j < dim; ++j) {
        const auto& v = row[static_cast<std::size_t>(j)];
        if (!v.is_number()) {
          std::ostringstream os;
          os << "state file: \"" << key << "\"[" << i << "][" << j
             << "] is not a number";
          throw ParseError(os.str());
        }
        const double x = v.get<double>();
        if (part == 0)
          m(i, j) = Complex(x, 0.0);
        else
          m(i, j) = Complex(m(i, j).real(), x);
      }
    }
  }
  return DensityMatrix(std::move(m));
}

/// Throws IoError if the file cannot be written.
inline void save_state(const DensityMatrix& rho, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << state_to_json(rho);
  if (!out) throw IoError("failed writing " + path);
}

inline DensityMatrix load_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open state file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return state_from_json(buf.str());
}

}  // namespace pchsh
