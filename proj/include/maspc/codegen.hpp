#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "maspc/comm_config.hpp"
#include "maspc/error.hpp"
#include "maspc/resolve.hpp"
#include "maspc/validator.hpp"

namespace maspc {

inline constexpr std::string_view kGeneratedHeader = "(* GENERATED \xE2\x80\x94 DO NOT EDIT *)";
inline constexpr std::string_view kProgramName = "Main";

enum class ArtifactKind { FunctionBlock, Function, Program };

const char* to_string(ArtifactKind k);

struct StArtifact {
  ArtifactKind kind = ArtifactKind::FunctionBlock;
  std::string name;
  std::string declaration_text;     // header line through the last END_VAR
  std::string implementation_text;  // statements, one per line

  /// Complete source file: generated-code banner, declaration, a blank
  /// line, implementation and the closing keyword.
  std::string render() const;
};

/// E_VALIDATION_FAILED, carrying the report that blocked generation.
class GenerationError : public Error {
 public:
  explicit GenerationError(ValidationReport report)
      : Error("E_VALIDATION_FAILED", "validation failed with " +
                                         std::to_string(count_severity(report.diagnostics, Severity::Error)) +
                                         " error(s)"),
        report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// FUNCTION for a TransientBlock. The out parameter becomes the return value:
/// it is renamed to the function name throughout the body. Throws
/// Error(E_BODY_PARSE) when the body is empty or does not parse.
StArtifact generate_function(const TransientBlock& block);

/// FUNCTION_BLOCK for a PersistentBlock. Throws Error(E_UNBOUND_FC_PARAM)
/// for an invoked constraint with an unbound input.
StArtifact generate_function_block(const ResolvedModel& model, const PersistentBlock& block);

/// PROGRAM Main for one node: one instance per allocated SA, invoked in
/// allocation order, with subscriber reads before and publisher writes
/// after the invocations.
StArtifact generate_node_program(const ResolvedModel& model, const Node& node, const CommConfig& comm);

struct NodeArtifacts {
  std::string node;  // node id; also the output directory name
  std::vector<StArtifact> artifacts;  // FCs then FBs, model order
  StArtifact program;
};

struct GeneratedProject {
  std::vector<NodeArtifacts> nodes;  // model order; nodes without SAs are skipped
  std::vector<std::string> shared;   // artifacts emitted for more than one node
  CommConfig comm;

  /// Relative path -> file content, e.g. "CX5020/MVA.st", "comm.json".
  std::map<std::string, std::string> files() const;
};

/// Validates first; errors throw GenerationError, warnings do not block.
GeneratedProject generate_project(const ResolvedModel& model, const ValidateOptions& options = {});

/// Writes every file of the project under `out`. Nothing is written unless
/// the whole project was generated.
void write_project(const GeneratedProject& project, const std::filesystem::path& out);

}  // namespace maspc
