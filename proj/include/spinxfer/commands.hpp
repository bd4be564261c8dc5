#pragma once

#include <string>
#include <vector>

#include "spinxfer/config.hpp"

namespace spinxfer {

/// Each command writes its files under cfg.out_dir and returns their names.
std::vector<std::string> run_restore(const RunConfig& cfg);
/// protocol_override: "" keeps cfg.protocol.
std::vector<std::string> run_ptz(const RunConfig& cfg, const std::string& protocol_override = "");
std::vector<std::string> run_analytic(const RunConfig& cfg);
std::vector<std::string> run_evolve(const RunConfig& cfg);

/// manifest.json: command, config hash, versions, runtime, outputs.
void write_manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& outputs,
                    double runtime_seconds, int threads);

/// 12 significant digits; "nan" for NaN.
std::string fmt(double v);

std::string sha256_hex(const std::string& data);

}  // namespace spinxfer
