#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ktri/runner.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
    return parts;
}

// Accepts "p", "p/q", or a plain decimal like "0.25".
std::optional<ktri::Rat> parse_time(const std::string& text) {
    if (auto r = ktri::parse_rat(text)) return r;
    const std::size_t dot = text.find('.');
    if (dot == std::string::npos) return std::nullopt;
    std::string digits = text;
    digits.erase(dot, 1);
    if (digits.empty() || digits == "-" || digits == "+") return std::nullopt;
    auto v = ktri::parse_rat(digits);
    if (!v) return std::nullopt;
    const std::size_t frac = text.size() - dot - 1;
    for (std::size_t i = 0; i < frac; ++i) *v /= 10;
    return v;
}

std::optional<ktri::MotionModel> parse_model(const std::string& text) {
    if (text == "linear" || text == "0") return ktri::MotionModel::kLinear;
    if (text == "quadratic" || text == "1") return ktri::MotionModel::kQuadratic;
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Maintains the pseudo-triangulation of moving planar points and reports its events"};
    ktri::RunConfig cfg;

    std::string gen, window, mode = "run", sizes, seeds;
    app.add_option("--scenario", cfg.scenario_file, "Scenario file to run")
        ->check(CLI::ExistingFile);
    app.add_option("--gen", gen,
                   "Generate the scenario: n,seed,model with model linear|quadratic");
    app.add_option("--priority-seed", cfg.priority_seed,
                   "Seed for the random point priorities (default 1)");
    app.add_option("--window", window, "Run window a,b inside the scenario window");
    app.add_option("--samples", cfg.samples,
                   "Reference comparisons per verify run (default 20)");
    app.add_option("--mode", mode, "run | verify | scale | census (default run)");
    app.add_option("--sizes", sizes, "Point counts for scale mode, e.g. 32,64,128,256");
    app.add_option("--seeds", seeds, "Scenario seeds for scale and verify modes, e.g. 1,2,3");
    app.add_option("--out", cfg.out_dir, "Directory for events.csv / stats.txt / scale.csv");
    app.add_flag("--strict-degeneracy", cfg.strict_degeneracy,
                 "Reject degenerate generated configurations instead of nudging them");
    app.add_option("--time-digits", cfg.time_digits,
                   "Significant digits for rendered event times (default 12)");
    CLI11_PARSE(app, argc, argv);

    auto usage_error = [](const std::string& message) {
        std::cerr << "ktri: " << message << '\n';
        return 2;
    };

    if (mode == "run") {
        cfg.mode = ktri::RunMode::kRun;
    } else if (mode == "verify") {
        cfg.mode = ktri::RunMode::kVerify;
    } else if (mode == "scale") {
        cfg.mode = ktri::RunMode::kScale;
    } else if (mode == "census") {
        cfg.mode = ktri::RunMode::kCensus;
    } else {
        return usage_error("unknown mode: " + mode);
    }

    if (!gen.empty()) {
        if (!cfg.scenario_file.empty()) return usage_error("--scenario and --gen are exclusive");
        const std::vector<std::string> parts = split_list(gen);
        std::optional<ktri::MotionModel> model;
        if (parts.size() == 3) model = parse_model(parts[2]);
        if (!model) return usage_error("--gen wants n,seed,model");
        try {
            cfg.gen_n = std::stoi(parts[0]);
            cfg.gen_seed = std::stoull(parts[1]);
        } catch (const std::exception&) {
            return usage_error("--gen wants n,seed,model");
        }
        cfg.gen_model = *model;
    }

    if (!window.empty()) {
        const std::vector<std::string> parts = split_list(window);
        std::optional<ktri::Rat> a, b;
        if (parts.size() == 2) {
            a = parse_time(parts[0]);
            b = parse_time(parts[1]);
        }
        if (!a || !b) return usage_error("--window wants two times a,b");
        cfg.has_window = true;
        cfg.window_a = *a;
        cfg.window_b = *b;
    }

    for (const std::string& part : split_list(sizes)) {
        if (part.empty()) continue;
        try {
            cfg.sizes.push_back(std::stoi(part));
        } catch (const std::exception&) {
            return usage_error("--sizes wants a comma list of point counts");
        }
    }
    for (const std::string& part : split_list(seeds)) {
        if (part.empty()) continue;
        try {
            cfg.seeds.push_back(std::stoull(part));
        } catch (const std::exception&) {
            return usage_error("--seeds wants a comma list of seeds");
        }
    }

    return ktri::run_command(cfg, std::cout, std::cerr);
}
