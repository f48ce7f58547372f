#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "subcal/shm_glm.hpp"

namespace subcal {

inline constexpr int kModelFormatVersion = 1;

// Versioned JSON text: link, k, baseline, coefficients, covariate names, fit
// metadata and (when present) the learning-sample censoring survival.
std::string model_to_json(const FittedModel& model, std::string_view generator = {});
FittedModel model_from_json(std::string_view text);

void save_model(const FittedModel& model, const std::filesystem::path& path,
                std::string_view generator = {});
FittedModel load_model(const std::filesystem::path& path);

}  // namespace subcal
