#include "snse/ledger.hpp"

#include <cstdio>
#include <cstring>
#include <sstream>

#include "snse/errors.hpp"
#include "snse/io.hpp"

namespace snse {

void EnergyLedger::reserve(std::size_t n) {
    t.reserve(n);
    l3.reserve(n);
    l6.reserve(n);
    h05.reserve(n);
    h1.reserve(n);
    dissip3.reserve(n);
    dissip6.reserve(n);
    h32_int.reserve(n);
    h2_int.reserve(n);
    frozen.reserve(n);
    for (auto& col : cutoff_cols) col.reserve(n);
}

std::string ledger_to_csv(const EnergyLedger& led) {
    std::string out = "# snse-ledger v1\n";
    out += "t,l3,l6,h05,h1,dissip3,dissip6,h32_int,h2_int";
    for (const auto& name : led.cutoff_names) out += "," + name;
    out += ",frozen\n";
    for (std::size_t i = 0; i < led.rows(); ++i) {
        out += format_double(led.t[i]);
        for (const auto* col : {&led.l3, &led.l6, &led.h05, &led.h1, &led.dissip3, &led.dissip6,
                                &led.h32_int, &led.h2_int}) {
            out += ',';
            out += format_double((*col)[i]);
        }
        for (const auto& col : led.cutoff_cols) {
            out += ',';
            out += format_double(col[i]);
        }
        out += led.frozen[i] ? ",1\n" : ",0\n";
    }
    return out;
}

EnergyLedger ledger_from_csv(const std::string& csv) {
    EnergyLedger led;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# snse-ledger", 0) != 0)
        throw ConfigError("ledger csv: missing version header");
    if (!std::getline(in, line)) throw ConfigError("ledger csv: missing column header");
    {
        std::istringstream hdr(line);
        std::string col;
        int idx = 0;
        while (std::getline(hdr, col, ',')) {
            if (idx >= 9 && col != "frozen") {
                led.cutoff_names.push_back(col);
                led.cutoff_cols.emplace_back();
            }
            ++idx;
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
        const std::size_t want = 9 + led.cutoff_names.size() + 1;
        if (vals.size() != want)
            throw ConfigError("ledger csv: row has " + std::to_string(vals.size()) +
                              " cells, expected " + std::to_string(want));
        led.t.push_back(vals[0]);
        led.l3.push_back(vals[1]);
        led.l6.push_back(vals[2]);
        led.h05.push_back(vals[3]);
        led.h1.push_back(vals[4]);
        led.dissip3.push_back(vals[5]);
        led.dissip6.push_back(vals[6]);
        led.h32_int.push_back(vals[7]);
        led.h2_int.push_back(vals[8]);
        for (std::size_t c = 0; c < led.cutoff_cols.size(); ++c)
            led.cutoff_cols[c].push_back(vals[9 + c]);
        led.frozen.push_back(vals.back() != 0.0 ? 1 : 0);
    }
    return led;
}

}  // namespace snse
