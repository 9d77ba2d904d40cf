#pragma once

// The implicit constants behind the asymptotic statements. Values marked
// calibrated are artifact-local fits from `km verify <suite> --calibrate`
// sweeps and are not mathematical claims.

#include <string>

#include <json.hpp>

namespace km {

struct Constants {
  double reg_const = 100.0;              // regularity: (1 - R d|k|)|B| <= |B_{1+k}| <= (1 + R d|k|)|B|
  double c_narrow = 0.001;               // narrowing dilation rho = c alpha eps / d; needs 2 R c < 1/4
  double c_bohr = 0.0003125;             // B' in B_{c eps alpha / d}; 2 R c <= 1/16
  double k_hold = 2.5;                   // p <= 2 ceil(K log(2/gamma))
  double k_unb = 1.9290442898872442;     // calibrated: p' <= ceil(K eps^-1 log(e/eps) p)
  double c_inc = 100.0;                  // increment certificate (1 + eps/C) alpha
  double k_regconv = 0.597537023899057;  // calibrated: ||mu_B * mu - mu_B||_1 <= K rho d
  double c_cover = 0.24935302460482522;  // calibrated: covering holds for rho <= c / (L d)
  double c_posdef = 0.005;               // positive-definite comparison dilation c / d; 2 c R <= 1
  double c_sumset = 0.00125;             // A+A+A narrowing rho = c alpha / d; 2 R c <= 1/4

  static const Constants& defaults();
  // Reads the committed ledger; missing keys keep the built-in defaults.
  static Constants load(const std::string& path);
  static std::string default_path();

  nlohmann::json to_json() const;
  static Constants from_json(const nlohmann::json& j);
};

}  // namespace km
