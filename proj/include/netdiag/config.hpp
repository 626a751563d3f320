#pragma once

#include <string>

#include "netdiag/dataset.hpp"
#include "netdiag/pipeline.hpp"
#include "netdiag/synth.hpp"

namespace netdiag {

// Everything the CLI needs, assembled from a flat `key = value` file. Every
// key is optional; the defaults describe the generator's own column layout,
// so an empty (or absent) config runs end to end on generated campaigns.
struct ToolConfig {
  AttributeSchema schema;
  PipelineConfig pipeline;
  SynthConfig synth;
};

ToolConfig default_tool_config();

// '#' starts a comment; blank lines are skipped; duplicate or unrecognized
// keys are hard errors. Throws InvalidConfig.
ToolConfig parse_config_text(const std::string& text);
ToolConfig parse_config_file(const std::string& path);

}  // namespace netdiag
