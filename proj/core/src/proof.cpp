#include "ovalcert/proof.hpp"

#include <charconv>
#include <istream>
#include <ostream>

namespace ovalcert {

namespace {

void append_line(std::string& buf, ProofKind kind, std::span<const Lit> lits) {
  if (kind == ProofKind::Delete) buf += "d ";
  if (kind == ProofKind::TrustedAdd) buf += "t ";
  char tmp[16];
  for (Lit l : lits) {
    auto [end, ec] = std::to_chars(tmp, tmp + sizeof tmp, l);
    buf.append(tmp, end);
    buf += ' ';
  }
  buf += "0\n";
}

}  // namespace

ProofWriter::~ProofWriter() {
  try {
    flush();
  } catch (const ProofError&) {
    // Destructors must not throw; callers that care call flush() themselves.
  }
}

void ProofWriter::line(ProofKind kind, std::span<const Lit> lits) {
  append_line(buffer_, kind, lits);
  if (buffer_.size() > (1U << 20)) flush();
}

void ProofWriter::flush() {
  if (!buffer_.empty()) {
    out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    buffer_.clear();
  }
  out_.flush();
  if (!out_) throw ProofError("proof stream write failed");
}

void write_proof(std::ostream& out, const std::vector<ProofLine>& lines) {
  std::string buf;
  for (const auto& l : lines) append_line(buf, l.kind, l.lits);
  out << buf;
}

bool parse_proof_line(std::string_view text, ProofLine& out) {
  const char* s = text.data();
  const char* end = s + text.size();
  auto skip = [&] {
    while (s < end && (*s == ' ' || *s == '\t' || *s == '\r')) ++s;
  };
  skip();
  if (s == end || *s == 'c') return false;
  out.kind = ProofKind::Add;
  out.lits.clear();
  if (*s == 'd' || *s == 't') {
    out.kind = *s == 'd' ? ProofKind::Delete : ProofKind::TrustedAdd;
    ++s;
  }
  bool terminated = false;
  while (true) {
    skip();
    if (s == end) break;
    if (terminated) throw ProofError("text after terminating 0");
    Lit lit = 0;
    auto [ptr, ec] = std::from_chars(s, end, lit);
    if (ec != std::errc() || ptr == s) throw ProofError("malformed literal");
    s = ptr;
    if (lit == 0) {
      terminated = true;
    } else {
      out.lits.push_back(lit);
    }
  }
  if (!terminated) throw ProofError("line is not terminated by 0");
  return true;
}

std::vector<ProofLine> read_proof(std::istream& in) {
  std::vector<ProofLine> out;
  std::string line;
  std::size_t lineno = 0;
  ProofLine pl;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      if (parse_proof_line(line, pl)) out.push_back(pl);
    } catch (const ProofError& e) {
      throw ProofError("proof line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ovalcert
