#include "cpscan/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace cpscan {

namespace {

// Neumaier's variant of Kahan summation.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

[[noreturn]] void throw_cell(const std::string& what, Index row, Index col) {
  std::ostringstream msg;
  msg << what << " at row " << row << ", column " << col;
  throw DataError(msg.str());
}

}  // namespace

Dataset::Dataset(Matrix x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.rows() != y_.size()) {
    std::ostringstream msg;
    msg << "dataset shape mismatch: X has " << x_.rows() << " rows but Y has " << y_.size() << " entries";
    throw DataError(msg.str());
  }
  if (x_.rows() < 4) throw DataError("dataset needs at least 4 observations");
  if (x_.cols() < 1) throw DataError("dataset needs at least one regressor");
  for (Index t = 0; t < x_.rows(); ++t) {
    if (!std::isfinite(y_(t))) throw_cell("non-finite response", t, 0);
    for (Index j = 0; j < x_.cols(); ++j) {
      if (!std::isfinite(x_(t, j))) throw_cell("non-finite regressor", t, j + 1);
    }
  }
}

Dataset Dataset::reversed() const {
  return Dataset(x_.colwise().reverse(), y_.reverse());
}

Dataset Dataset::permuted(std::span<const Index> order) const {
  if (static_cast<Index>(order.size()) != n()) throw ConfigError("permutation length does not match n");
  Matrix x(n(), p());
  Vector y(n());
  for (Index t = 0; t < n(); ++t) {
    x.row(t) = x_.row(order[t]);
    y(t) = y_(order[t]);
  }
  return Dataset(std::move(x), std::move(y));
}

PrefixSummaries::PrefixSummaries(double a0, Vector r, Matrix s) : a0_(a0), r_(std::move(r)), s_(std::move(s)) {
  if (r_.size() != s_.rows()) throw InternalError("prefix summaries: r and S lengths differ");
}

PrefixSummaries precompute(const Dataset& ds) {
  const Index n = ds.n();
  const Index p = ds.p();
  const Matrix& x = ds.x();
  const Vector& y = ds.y();

  Vector r(n + 1);
  Matrix s(n + 1, p);
  r(0) = 0.0;
  s.row(0).setZero();

  CompensatedSum a0;
  CompensatedSum rk;
  std::vector<CompensatedSum> sk(static_cast<std::size_t>(p));
  for (Index t = 0; t < n; ++t) {
    const double yt = y(t);
    const double* xt = x.data() + t * p;
    double* out = s.data() + (t + 1) * p;
    for (Index j = 0; j < p; ++j) {
      a0.add(xt[j] * xt[j]);
      sk[j].add(xt[j] * yt);
      out[j] = sk[j].value();
    }
    rk.add(yt * yt);
    r(t + 1) = rk.value();
  }
  return PrefixSummaries(a0.value() / static_cast<double>(n), std::move(r), std::move(s));
}

Vector contrast(const PrefixSummaries& ps, Index k) {
  const Index n = ps.n();
  if (k < 1 || k > n - 1) {
    std::ostringstream msg;
    msg << "contrast: split index " << k << " outside [1, " << n - 1 << "]";
    throw std::out_of_range(msg.str());
  }
  const auto sk = ps.s(k);
  const auto sn = ps.s(n);
  const double frac = static_cast<double>(k) / static_cast<double>(n);
  Vector out(ps.p());
  for (Index j = 0; j < ps.p(); ++j) out(j) = sk[j] - frac * sn[j];
  return out;
}

namespace {

double parse_field(std::string_view field, Index row, Index col) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw_cell("unparsable value '" + std::string(field) + "'", row, col);
  }
  return v;
}

}  // namespace

Dataset read_csv(std::istream& in, bool header) {
  std::string line;
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1) continue;
    if (line.empty() || line == "\r") continue;
    Index c = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(parse_field(rest.substr(0, comma), rows, c));
      ++c;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols < 0) {
      cols = c;
    } else if (c != cols) {
      std::ostringstream msg;
      msg << "row " << rows << " has " << c << " columns, expected " << cols;
      throw DataError(msg.str());
    }
    ++rows;
  }
  if (cols < 2) throw DataError("CSV needs a response column and at least one regressor column");
  Matrix x(rows, cols - 1);
  Vector y(rows);
  for (Index t = 0; t < rows; ++t) {
    y(t) = values[t * cols];
    for (Index j = 1; j < cols; ++j) x(t, j - 1) = values[t * cols + j];
  }
  return Dataset(std::move(x), std::move(y));
}

Dataset read_csv_file(const std::filesystem::path& path, bool header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in, header);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw InternalError("format_double failed");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Dataset& ds, bool header) {
  if (header) {
    out << "y";
    for (Index j = 0; j < ds.p(); ++j) out << ",x" << j + 1;
    out << '\n';
  }
  std::string line;
  for (Index t = 0; t < ds.n(); ++t) {
    line = format_double(ds.y()(t));
    for (Index j = 0; j < ds.p(); ++j) {
      line += ',';
      line += format_double(ds.x()(t, j));
    }
    line += '\n';
    out << line;
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cpscan
