#pragma once

// JSON file formats and the dephkit command dispatcher.
//
//   MatrixFile   {"rows": r, "cols": c, "data": [[re, im], ...]}   row-major,
//                optional "tol": validation tolerance recommended for the data
//   channel      {"kind": "kraus", "dim_in": n, "dim_out": m, "kraus": [MatrixFile, ...]}
//                {"kind": "jamiolkowski", "dim": d, "matrix": MatrixFile}
//   bipartite    {"kind": "kraus", "sys_in", "mem_in", "sys_out", "mem_out", "kraus": [...]}
//   family       {"d": d, "pre": [MatrixFile, ...], "post": [MatrixFile, ...]}
//
// Exit codes of run(): 0 pass or value, 1 domain failure, 2 I/O or parse failure.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dephkit/superchannels.hpp"

namespace dephkit::cli {

/// Unreadable file, malformed JSON, or a document not matching its format.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct MatrixFile {
  ComplexMatrix mat;
  std::optional<double> tol;
};

/// 64-bit FNV-1a digest as 16 hex digits.
std::string fnv1a_hex(const std::string &bytes);

std::string read_text_file(const std::string &path);

MatrixFile parse_matrix(const std::string &json_text);
/// Shortest round-trip decimal form; re-parsing gives bit-identical doubles.
std::string format_matrix(const ComplexMatrix &m);

MatrixFile read_matrix_file(const std::string &path);
void write_matrix_file(const std::string &path, const ComplexMatrix &m);

/// Channel from a channel file. Files without "kind" fall back to detection:
/// a "kraus" list, or a bare matrix accepted as a Jamiolkowski state when it
/// passes the PSD/TP audit and as a unitary channel when it is unitary.
Channel parse_channel(const std::string &json_text, double tol = kStateTol);
std::string format_channel(const Channel &ch);

BipartiteChannel parse_bipartite(const std::string &json_text);
std::string format_bipartite(const BipartiteChannel &ch);

std::pair<ControlledUnitaryFamily, ControlledUnitaryFamily> parse_family(const std::string &json_text);
std::string format_family(const ControlledUnitaryFamily &pre, const ControlledUnitaryFamily &post);

/// Runs one command line (without the program name).
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace dephkit::cli
