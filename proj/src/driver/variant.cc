#include "cxlsim/driver/variant.hh"

#include <fmt/core.h>

namespace cxlsim {

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {"Base", "C", "P", "W", "CP", "WP", "Full", "DRAM-Only"};
  return names;
}

VariantKnobs variant_knobs(std::string_view name) {
  if (name == "Base") return {false, false, false, false};
  if (name == "C") return {true, false, false, false};
  if (name == "P") return {false, true, false, false};
  if (name == "W") return {false, false, true, false};
  if (name == "CP") return {true, true, false, false};
  if (name == "WP") return {false, true, true, false};
  if (name == "Full") return {true, true, true, false};
  if (name == "DRAM-Only") return {false, false, false, true};
  throw ConfigError(fmt::format("unknown variant '{}'", name));
}

void apply_variant(SimConfig& cfg, std::string_view name) {
  VariantKnobs k = variant_knobs(name);
  cfg.device_triggered_ctx_swt = k.ctx_switch;
  cfg.promotion_enable = k.promotion;
  cfg.write_log_enable = k.write_log;
  cfg.dram_only = k.dram_only;
}

}  // namespace cxlsim
