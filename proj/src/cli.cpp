#include "covidx/cli.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "covidx/error.hpp"
#include "covidx/ingestion.hpp"
#include "covidx/stats.hpp"
#include "covidx/synthetic.hpp"

namespace covidx {

namespace {

Panel load_input(const InputConfig& input) {
    switch (input.kind) {
    case InputConfig::Kind::dpc_national:
        return parse_dpc_national(input.path);
    case InputConfig::Kind::csv:
        break;
    }
    return parse_panel_csv(input.path, input.date_column, input.columns);
}

int exit_code_for(const std::exception_ptr& e, std::ostream& log) {
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError& err) {
        log << "error: " << err.what() << "\n";
        return exit_code::usage;
    } catch (const EnsembleError& err) {
        log << "error: " << err.what() << "\n";
        return exit_code::ensemble;
    } catch (const Error& err) {
        log << "error: " << err.what() << "\n";
        return exit_code::data;
    } catch (const std::exception& err) {
        log << "error: " << err.what() << "\n";
        return exit_code::data;
    }
}

template <class F>
int guarded(std::ostream& log, F&& body) {
    try {
        return body();
    } catch (...) {
        return exit_code_for(std::current_exception(), log);
    }
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError(flag + ": '" + item + "' is not a number");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void write_factor(const SyntheticData& data, const std::filesystem::path& path) {
    Panel factor;
    factor.dates = data.panel.dates;
    factor.variables = {"factor"};
    factor.values = Eigen::Map<const Eigen::VectorXd>(data.factor.data(), Eigen::Index(data.factor.size()));
    write_panel_csv(factor, path);
}

} // namespace

OutputTable index_table(const EnsembleResult& result) {
    OutputTable table;
    table.dates = result.index.dates;
    table.add_column("index", result.index.values);
    table.add_column("per_date_count",
                     std::vector<double>(result.per_date_count.begin(), result.per_date_count.end()));

    std::map<Date, std::size_t> row_of;
    for (std::size_t i = 0; i < table.dates.size(); ++i) row_of.emplace(table.dates[i], i);
    for (const auto& member : result.members) {
        std::vector<double> column(table.dates.size(), kMissing);
        for (std::size_t t = 0; t < member.dates.size(); ++t) {
            if (!member.coverage[t]) continue;
            const auto it = row_of.find(member.dates[t]);
            if (it != row_of.end()) column[it->second] = member.values[t];
        }
        table.add_column(member.model_id, std::move(column));
    }
    return table;
}

OutputTable spread_table(const SpreadSeries& spread) {
    OutputTable table;
    table.dates = spread.dates;
    table.add_column("csi", spread.values);
    return table;
}

double index_reconstruction_error(const OutputTable& table) {
    const auto find = [&](const std::string& name) -> const std::vector<double>& {
        const auto it = std::find(table.names.begin(), table.names.end(), name);
        if (it == table.names.end()) throw SchemaError(name);
        return table.columns[std::size_t(it - table.names.begin())];
    };
    const auto& index = find("index");
    find("per_date_count");
    const std::size_t n = table.dates.size();
    if (n < 2) throw DataError("index table needs at least 2 rows");

    std::vector<double> mean(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t c = 0; c < table.names.size(); ++c) {
            if (table.names[c] == "index" || table.names[c] == "per_date_count") continue;
            const double v = table.columns[c][t];
            if (is_missing(v)) continue;
            sum += v;
            ++count;
        }
        if (count == 0) throw DataError("index table row " + table.dates[t].iso() + " has no member values");
        mean[t] = sum / count;
    }
    const double sd = sample_sd(mean);
    if (!(sd > 0.0)) throw DegenerateInputError("member mean is constant");
    double worst = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double rebuilt = 100.0 + (100.0 / sd) * (mean[t] - mean[0]);
        worst = std::max(worst, std::fabs(rebuilt - index[t]));
    }
    return worst;
}

int cmd_compute_index(const RunConfig& config, std::ostream& log) {
    return guarded(log, [&] {
        const Panel panel = load_input(config.input);
        const auto space = resolve_model_space(config, panel);
        const EnsembleResult result = run_ensemble(panel, space, config.preprocess);
        for (const auto& f : result.failures) log << "warning: member " << f.model_id << " failed: " << f.reason << "\n";
        for (const auto& w : result.warnings) log << "warning: " << w << "\n";
        for (const auto& m : result.members) {
            for (const auto& w : m.warnings) log << "warning: " << m.model_id << ": " << w << "\n";
        }
        index_table(result).write(config.output.path, config.output.format);
        if (config.spread) {
            const int rc = cmd_compute_spread(*config.spread, config.output.format, log);
            if (rc != exit_code::ok) return rc;
        }
        return exit_code::ok;
    });
}

int cmd_compute_spread(const SpreadConfig& config, OutputFormat format, std::ostream& log) {
    return guarded(log, [&] {
        RegionalCases cases = parse_dpc_regional(config.input);
        if (config.smoothing.kind != Smoothing::Kind::none) {
            cases.new_cases = smooth(cases.new_cases, config.smoothing);
        }
        const SpreadSeries spread = compute_csi(cases);
        spread_table(spread).write(config.output, format);
        return exit_code::ok;
    });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic COVID index: ensemble latent-factor index and regional spread index"};
    app.require_subcommand(1);

    auto* index = app.add_subcommand("index", "Compute the ensemble index from a JSON run config");
    std::string config_path, input_override, output_override, format_override, smoothing_override;
    index->add_option("--config", config_path, "Run config (JSON)")->required();
    index->add_option("--input", input_override, "Override input.path");
    index->add_option("--output", output_override, "Override output.path");
    index->add_option("--format", format_override, "Override output.format (csv or json)");
    index->add_option("--smoothing", smoothing_override, "Override preprocess.smoothing (none, ema:A, moving_average:W)");

    auto* spread = app.add_subcommand("spread", "Compute the regional spread index from a DPC regional CSV");
    SpreadConfig spread_cfg;
    std::string spread_format = "csv", spread_smoothing = "none";
    spread->add_option("--input", spread_cfg.input, "Regional CSV")->required();
    spread->add_option("--output", spread_cfg.output, "Output table")->required();
    spread->add_option("--format", spread_format, "csv or json");
    spread->add_option("--smoothing", spread_smoothing, "Smoothing of daily counts (none, ema:A, moving_average:W)");

    auto* simulate = app.add_subcommand("simulate", "Write a planted one-factor panel and its true factor");
    SyntheticSpec sim;
    std::string process = "random_walk", loadings, noise_sd, start, prefix;
    simulate->add_option("--seed", sim.seed, "Generator seed");
    simulate->add_option("--n-obs", sim.n_obs, "Number of dates");
    simulate->add_option("--n-vars", sim.n_vars, "Number of variables");
    simulate->add_option("--process", process, "random_walk or ar1");
    simulate->add_option("--phi", sim.phi, "AR(1) coefficient");
    simulate->add_option("--loadings", loadings, "Comma-separated loadings");
    simulate->add_option("--noise-sd", noise_sd, "One value or a comma-separated list");
    simulate->add_option("--missing-rate", sim.missing_rate, "Probability of knocking out a cell");
    simulate->add_option("--start", start, "First date (YYYY-MM-DD)");
    simulate->add_option("--output", prefix, "Writes PREFIX.panel.csv and PREFIX.factor.csv")->required();

    auto* verify = app.add_subcommand("verify", "Check that an index table's index column follows from its member columns");
    std::string verify_input;
    double verify_tol = 1e-6;
    verify->add_option("--input", verify_input, "Table written by 'index'")->required();
    verify->add_option("--tolerance", verify_tol, "Largest accepted absolute discrepancy");

    app.add_subcommand("default-config", "Print an example run config");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }

    if (*index) {
        RunConfig cfg;
        try {
            cfg = load_run_config(config_path);
            if (!input_override.empty()) cfg.input.path = input_override;
            if (!output_override.empty()) cfg.output.path = output_override;
            if (!format_override.empty()) cfg.output.format = parse_output_format(format_override);
            if (!smoothing_override.empty()) cfg.preprocess.smoothing = parse_smoothing(smoothing_override);
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << "\n";
            return exit_code::usage;
        }
        return cmd_compute_index(cfg, err);
    }
    if (*spread) {
        OutputFormat format;
        try {
            format = parse_output_format(spread_format);
            spread_cfg.smoothing = parse_smoothing(spread_smoothing);
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << "\n";
            return exit_code::usage;
        }
        return cmd_compute_spread(spread_cfg, format, err);
    }
    if (*simulate) {
        return guarded(err, [&] {
            if (process == "random_walk") {
                sim.process = SyntheticSpec::Process::random_walk;
            } else if (process == "ar1") {
                sim.process = SyntheticSpec::Process::ar1;
            } else {
                throw ConfigError("--process must be random_walk or ar1");
            }
            if (!loadings.empty()) sim.loadings = parse_list(loadings, "--loadings");
            if (!noise_sd.empty()) {
                sim.noise_sd = parse_list(noise_sd, "--noise-sd");
                if (sim.noise_sd.size() == 1) sim.noise_sd.assign(std::size_t(std::max(sim.n_vars, 0)), sim.noise_sd[0]);
            }
            if (!start.empty()) {
                const auto parsed = Date::parse(start);
                if (!parsed) throw ConfigError("--start: '" + start + "' is not a YYYY-MM-DD date");
                sim.start = *parsed;
            }
            sim.validate();
            const SyntheticData data = generate(sim);
            write_panel_csv(data.panel, prefix + ".panel.csv");
            write_factor(data, prefix + ".factor.csv");
            out << "seed " << sim.seed << "\n";
            return exit_code::ok;
        });
    }
    if (*verify) {
        return guarded(err, [&] {
            const double worst = index_reconstruction_error(read_output_table(verify_input));
            if (worst > verify_tol) {
                err << "error: index differs from the rebased member mean by " << format_number(worst) << "\n";
                return exit_code::data;
            }
            out << "ok: largest discrepancy " << format_number(worst) << "\n";
            return exit_code::ok;
        });
    }
    out << example_config();
    return exit_code::ok;
}

} // namespace covidx
