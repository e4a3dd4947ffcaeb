#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ancod/error.hpp"
#include "ancod/frame.hpp"

// Format (whitespace separated, line oriented header):
//
//   ancod-frame 1
//   n <int>
//   m <int>
//   field real|complex
//   kind <kind>
//   spectrum none | <count> <i_0> ... <i_{m-1}>
//   seed none | <uint64>
//   data
//   <row 0 values> ...            (complex: re im pairs)

namespace ancod {

namespace {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& token) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw FormatError("bad numeric value '" + token + "'");
  }
  return v;
}

std::string expect_key(std::istream& is, const std::string& key) {
  std::string k;
  if (!(is >> k) || k != key) throw FormatError("expected '" + key + "' in frame header");
  std::string v;
  if (key != "data" && !(is >> v)) throw FormatError("missing value for '" + key + "'");
  return v;
}

}  // namespace

void write_frame(std::ostream& os, const Frame& frame) {
  os << "ancod-frame 1\n";
  os << "n " << frame.rows() << "\n";
  os << "m " << frame.cols() << "\n";
  os << "field " << to_string(frame.field()) << "\n";
  os << "kind " << to_string(frame.kind()) << "\n";
  os << "spectrum ";
  if (frame.spectrum()) {
    os << frame.spectrum()->size();
    for (int f : *frame.spectrum()) os << ' ' << f;
  } else {
    os << "none";
  }
  os << "\nseed ";
  if (frame.seed()) {
    os << *frame.seed();
  } else {
    os << "none";
  }
  os << "\ndata\n";
  if (const auto* a = std::get_if<RealMatrix>(&frame.data())) {
    for (int i = 0; i < a->rows(); ++i) {
      for (int j = 0; j < a->cols(); ++j) os << (j ? " " : "") << format_double((*a)(i, j));
      os << '\n';
    }
  } else {
    const auto& c = std::get<ComplexMatrix>(frame.data());
    for (int i = 0; i < c.rows(); ++i) {
      for (int j = 0; j < c.cols(); ++j) {
        os << (j ? " " : "") << format_double(c(i, j).real()) << ' ' << format_double(c(i, j).imag());
      }
      os << '\n';
    }
  }
}

Frame read_frame(std::istream& is) {
  std::string magic;
  std::string version;
  if (!(is >> magic >> version) || magic != "ancod-frame" || version != "1") {
    throw FormatError("not an ancod frame file");
  }
  const int n = std::stoi(expect_key(is, "n"));
  const int m = std::stoi(expect_key(is, "m"));
  if (n < 1 || m < 1) throw FormatError("frame dimensions must be positive");
  const Field field = parse_field(expect_key(is, "field"));
  const FrameKind kind = parse_frame_kind(expect_key(is, "kind"));

  std::optional<std::vector<int>> spectrum;
  const std::string spec_token = expect_key(is, "spectrum");
  if (spec_token != "none") {
    const int count = std::stoi(spec_token);
    std::vector<int> s(static_cast<std::size_t>(count));
    for (int& f : s)
      if (!(is >> f)) throw FormatError("truncated spectrum");
    spectrum = std::move(s);
  }
  std::optional<std::uint64_t> seed;
  const std::string seed_token = expect_key(is, "seed");
  if (seed_token != "none") seed = std::stoull(seed_token);
  expect_key(is, "data");

  auto next = [&]() {
    std::string token;
    if (!(is >> token)) throw FormatError("truncated frame data");
    return parse_double(token);
  };
  if (field == Field::real) {
    RealMatrix a(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = next();
    return Frame(std::move(a), kind, std::move(spectrum), seed);
  }
  ComplexMatrix a(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double re = next();
      const double im = next();
      a(i, j) = Complex(re, im);
    }
  return Frame(std::move(a), kind, std::move(spectrum), seed);
}

void save_frame(const std::string& path, const Frame& frame) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_frame(os, frame);
}

Frame load_frame(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_frame(is);
}

}  // namespace ancod
