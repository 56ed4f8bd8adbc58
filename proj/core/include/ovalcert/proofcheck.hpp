#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ovalcert/cnf.hpp"
#include "ovalcert/geometry.hpp"
#include "ovalcert/onefact.hpp"
#include "ovalcert/proof.hpp"

namespace ovalcert {

enum class Verdict {
  VerifiedUnsat,
  VerifiedModel,
  // Every target lemma holds but the proof does not reach the empty clause.
  VerifiedLemmas,
  Failed,
};

const char* to_string(Verdict v);

struct CheckReport {
  Verdict verdict = Verdict::Failed;
  std::size_t failed_step = 0;  // 1-based proof line (or clause) index
  std::string reason;
  std::uint64_t lines = 0;
  std::uint64_t checked = 0;
  std::uint64_t trusted = 0;
  std::uint64_t deleted = 0;
  std::uint64_t ignored_deletions = 0;  // deletions of root reason clauses
  std::size_t peak_bytes = 0;
  double seconds = 0;

  bool ok() const { return verdict != Verdict::Failed; }
};

struct CheckOptions {
  // Check trusted lines like ordinary additions.
  bool demote_trusted = false;
  // Lemmas (e.g. refuted cube negations) that must be RUP at the end of the
  // proof when it stops short of the empty clause.
  std::vector<std::vector<Lit>> targets;
  // Fail once clause storage exceeds this many bytes (0 = unlimited).
  std::size_t memory_limit = 0;
};

// Forward DRUP checking with trusted additions. Assumptions are added as
// unit clauses to the initial database.
CheckReport check_unsat(const CnfInstance& instance, const std::vector<Lit>& assumptions,
                        const std::vector<ProofLine>& proof, const CheckOptions& options = {});
CheckReport check_unsat(const CnfInstance& instance, const std::vector<Lit>& assumptions,
                        std::istream& proof, const CheckOptions& options = {});

// The model is indexed by variable with entry 0 unused and must cover all
// variables.
CheckReport check_model(const CnfInstance& instance, const std::vector<Lit>& assumptions,
                        const std::vector<bool>& model);

// Re-derivation of trusted lines.
enum class TrustedKind { Symmetry, SolutionBlock, Unjustified };

const char* to_string(TrustedKind k);

struct TrustedEntry {
  std::size_t step = 0;
  TrustedKind kind = TrustedKind::Unjustified;
  int block = 0;  // for symmetry lines
  int label = 0;  // pessimistic label of the blocked block
  std::string detail;
};

struct AuditReport {
  std::vector<TrustedEntry> entries;
  std::size_t justified = 0;
  std::size_t unjustified = 0;
  bool ok() const { return unjustified == 0; }
};

struct AuditContext {
  const OvalFrame* frame = nullptr;
  const LabelTable* table = nullptr;
  const VarMap* varmap = nullptr;
  int own_label = 0;  // label of the fixed block
  // Blocks a symmetry line may legitimately block.
  std::vector<int> checked_blocks;
  // Recorded completions (sets of positive cells over the searched blocks).
  std::vector<Assignment> completions;
};

// Symmetry lines must negate the true cells of one complete checked block
// whose pessimistic label is below own_label; solution-block lines must
// negate exactly the true cells of a recorded completion.
AuditReport audit_trusted(const std::vector<ProofLine>& proof, const AuditContext& context);

}  // namespace ovalcert
