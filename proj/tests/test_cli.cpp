// Exercises the installed binary end to end: exit codes, output trees, and
// the report command's integrity checking. argv[1] is the snse binary,
// argv[2] the fixture directory.
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;
fs::path log_path;

int run(const std::string& cmd) {
    const std::string full = cmd + " >\"" + log_path.string() + "\" 2>&1";
    const int raw = std::system(full.c_str());
    if (raw == -1 || !WIFEXITED(raw)) return -1;
    return WEXITSTATUS(raw);
}

void dump_log() {
    std::ifstream in(log_path);
    std::string line;
    while (std::getline(in, line)) std::fprintf(stderr, "    | %s\n", line.c_str());
}

void expect_exit(const std::string& name, const std::string& cmd, int want) {
    const int got = run(cmd);
    if (got == want) {
        std::printf("ok   %-34s exit %d\n", name.c_str(), got);
    } else {
        std::printf("FAIL %-34s exit %d, expected %d\n", name.c_str(), got, want);
        dump_log();
        ++failures;
    }
}

void expect_file(const std::string& name, const fs::path& p) {
    if (fs::is_regular_file(p)) {
        std::printf("ok   %-34s present\n", name.c_str());
    } else {
        std::printf("FAIL %-34s missing: %s\n", name.c_str(), p.string().c_str());
        ++failures;
    }
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <snse-binary> <fixture-dir>\n", argv[0]);
        return 2;
    }
    const std::string snse = std::string("\"") + argv[1] + "\"";
    const fs::path data = argv[2];
    const fs::path tmp =
        fs::temp_directory_path() / ("snse_cli_" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    log_path = tmp / "log.txt";

    const std::string tiny = "\"" + (data / "tiny2d.json").string() + "\"";

    expect_exit("help", snse + " --help", 0);
    expect_exit("version", snse + " --version", 0);
    expect_exit("no subcommand", snse, 1);
    expect_exit("unknown subcommand", snse + " frobnicate", 1);
    expect_exit("missing config file", snse + " simulate --config \"" +
                                           (data / "nope.json").string() + "\"", 1);
    expect_exit("unknown config key", snse + " decompose --config \"" +
                                          (data / "bad_key.json").string() + "\"", 1);
    expect_exit("infeasible datum", snse + " decompose --config \"" +
                                        (data / "infeasible.json").string() + "\"", 2);
    expect_exit("bad mode flag", snse + " simulate --config " + tiny + " --mode h7", 1);

    const fs::path dec_dir = tmp / "dec";
    expect_exit("decompose", snse + " decompose --config " + tiny + " --out \"" +
                                 dec_dir.string() + "\"", 0);
    expect_file("decompose manifest", dec_dir / "manifest.json");
    expect_file("decompose u0", dec_dir / "fields/u0.bin");
    expect_file("decompose u0 sidecar", dec_dir / "fields/u0.bin.json");
    expect_file("decompose bulk", dec_dir / "fields/wbar0.bin");
    expect_file("decompose level 0", dec_dir / "fields/level_0.bin");
    expect_file("decompose summary", dec_dir / "decomposition.json");

    expect_exit("report on decompose", snse + " report --out \"" + dec_dir.string() + "\"", 0);

    // flipping one byte of a cataloged file must fail the report
    {
        std::fstream f(dec_dir / "fields/u0.bin",
                       std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(32);
        char c = 0;
        f.seekg(32);
        f.read(&c, 1);
        c = static_cast<char>(c ^ 0x5a);
        f.seekp(32);
        f.write(&c, 1);
    }
    expect_exit("report detects corruption",
                snse + " report --out \"" + dec_dir.string() + "\"", 1);
    expect_exit("report without directory", snse + " report", 1);

    const fs::path sim_dir = tmp / "sim";
    expect_exit("simulate", snse + " simulate --config " + tiny + " --out \"" +
                                sim_dir.string() + "\" --workers 2", 0);
    expect_file("simulate manifest", sim_dir / "manifest.json");
    expect_file("simulate ledger", sim_dir / "ledgers/path_0000/u.csv");
    expect_file("simulate final field", sim_dir / "fields/path_0000_u_final.bin");
    expect_exit("report on simulate", snse + " report --out \"" + sim_dir.string() + "\"", 0);

    // same config, fresh directory: the File inventories must agree byte for byte
    const fs::path sim_dir2 = tmp / "sim2";
    expect_exit("simulate again", snse + " simulate --config " + tiny + " --out \"" +
                                      sim_dir2.string() + "\" --workers 1", 0);
    {
        std::ifstream a(sim_dir / "manifest.json"), b(sim_dir2 / "manifest.json");
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        if (sa == sb && !sa.empty()) {
            std::printf("ok   %-34s identical\n", "rerun manifests");
        } else {
            std::printf("FAIL %-34s differ\n", "rerun manifests");
            ++failures;
        }
    }

    if (failures == 0) fs::remove_all(tmp);
    std::printf("%s (%d failures)\n", failures == 0 ? "CLI SUITE PASSED" : "CLI SUITE FAILED",
                failures);
    return failures == 0 ? 0 : 1;
}
