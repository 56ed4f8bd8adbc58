#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ovalcert/cnf.hpp"

namespace ovalcert {

enum class ProofKind { Add, Delete, TrustedAdd };

// One step of a clausal certificate. Text form: "l1 .. lk 0" for additions,
// "d l1 .. lk 0" for deletions and "t l1 .. lk 0" for trusted additions.
struct ProofLine {
  ProofKind kind = ProofKind::Add;
  std::vector<Lit> lits;
  bool operator==(const ProofLine&) const = default;
};

class ProofError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProofSink {
 public:
  virtual ~ProofSink() = default;
  virtual void line(ProofKind kind, std::span<const Lit> lits) = 0;
  void add(std::span<const Lit> lits) { line(ProofKind::Add, lits); }
  void remove(std::span<const Lit> lits) { line(ProofKind::Delete, lits); }
  void trusted(std::span<const Lit> lits) { line(ProofKind::TrustedAdd, lits); }
};

// Streams proof text. Throws ProofError once the stream fails.
class ProofWriter : public ProofSink {
 public:
  explicit ProofWriter(std::ostream& out) : out_(out) {}
  ~ProofWriter() override;
  void line(ProofKind kind, std::span<const Lit> lits) override;
  void flush();

 private:
  std::ostream& out_;
  std::string buffer_;
};

class ProofRecorder : public ProofSink {
 public:
  void line(ProofKind kind, std::span<const Lit> lits) override {
    lines.push_back({kind, {lits.begin(), lits.end()}});
  }
  std::vector<ProofLine> lines;
};

void write_proof(std::ostream& out, const std::vector<ProofLine>& lines);
// Parses one text line. Returns false for blank and comment lines; throws
// ProofError on malformed or unterminated lines.
bool parse_proof_line(std::string_view text, ProofLine& out);
// Throws ProofError on malformed or unterminated lines.
std::vector<ProofLine> read_proof(std::istream& in);

}  // namespace ovalcert
