#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace snse {

// Per-path time series of the tracked functionals of one field. Dissipation
// columns are running trapezoid integrals of the instantaneous functionals;
// h32_int / h2_int likewise accumulate the squared H^{3/2} / H^2 norms (used
// by the critical-mode cutoffs). Cutoff columns are named per context (levels
// carry psi/phi/zeta/psi_wbar, the bulk carries psi_wbar, plain runs none).
struct EnergyLedger {
    std::vector<double> t;
    std::vector<double> l3, l6, h05, h1;
    std::vector<double> dissip3, dissip6;    // int_0^t D_p(f) ds
    std::vector<double> h32_int, h2_int;     // int_0^t ||f||_{H^s}^2 ds
    std::vector<std::uint8_t> frozen;
    std::vector<std::string> cutoff_names;
    std::vector<std::vector<double>> cutoff_cols;  // aligned with cutoff_names

    std::size_t rows() const { return t.size(); }
    void reserve(std::size_t n);
};

// CSV with a fixed header; floats printed with "%.17g" so identical runs are
// byte-identical. See docs/field-format.md for the column list.
std::string ledger_to_csv(const EnergyLedger& led);
EnergyLedger ledger_from_csv(const std::string& csv);

}  // namespace snse
