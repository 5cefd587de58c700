#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cxlsim/sim/config.hh"

namespace cxlsim {

struct VariantKnobs {
  bool ctx_switch = false;
  bool promotion = false;
  bool write_log = false;
  bool dram_only = false;
};

const std::vector<std::string>& variant_names();
// Throws ConfigError for an unknown name.
VariantKnobs variant_knobs(std::string_view name);
void apply_variant(SimConfig& cfg, std::string_view name);

}  // namespace cxlsim
