// circsim command-line front end.

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "circsim/devices.hpp"
#include "circsim/lab/server.hpp"
#include "circsim/sketch_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitSmoke = 2;

// Parse failures print their diagnostics and yield nullopt.
std::optional<circsim::Sketch> load(const std::string& path) {
    auto parsed = circsim::load_sketch(path);
    if (!parsed.sketch || !parsed.diagnostics.empty()) {
        for (const auto& d : parsed.diagnostics) std::cerr << path << ": " << circsim::to_string(d) << "\n";
        return std::nullopt;
    }
    return std::move(parsed.sketch);
}

circsim::lab::LabServer* g_server = nullptr;

void on_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"circsim: breadboard DC circuit simulator"};
    app.require_subcommand(1);

    std::string sketch_path;
    bool json = false;

    auto* run = app.add_subcommand("run", "Simulate a sketch and print the report");
    run->add_option("sketch", sketch_path, "Sketch file")->required();
    run->add_flag("--json", json, "Machine-readable report");

    auto* check = app.add_subcommand("check", "Simulate; exit 2 if anything smokes");
    check->add_option("sketch", sketch_path, "Sketch file")->required();
    check->add_flag("--json", json, "Machine-readable report");

    std::string netlist_out;
    auto* netlist = app.add_subcommand("netlist", "Export a spice netlist");
    netlist->add_option("sketch", sketch_path, "Sketch file")->required();
    netlist->add_option("-o,--output", netlist_out, "Output file (default stdout)");

    circsim::lab::ServerOptions server_opts;
    auto* serve = app.add_subcommand("serve", "Run the interactive lab server");
    serve->add_option("--port", server_opts.port, "TCP port")->capture_default_str();
    serve->add_option("--address", server_opts.address, "Bind address")->capture_default_str();
    serve->add_option("--static", server_opts.static_dir, "Directory served as the UI bundle");

    auto* devices = app.add_subcommand("devices", "List supported component kinds");

    CLI11_PARSE(app, argc, argv);

    if (*devices) {
        std::cout << circsim::device_reference_markdown();
        return kExitOk;
    }

    if (*serve) {
        circsim::lab::LabServer server(server_opts);
        g_server = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        try {
            const auto port = server.start();
            std::cerr << "circsim lab listening on " << server_opts.address << ":" << port << "\n";
            server.run();
        } catch (const std::exception& e) {
            std::cerr << "serve: " << e.what() << "\n";
            return kExitError;
        }
        g_server = nullptr;
        return kExitOk;
    }

    const auto sketch = load(sketch_path);
    if (!sketch) return kExitError;

    if (*netlist) {
        const auto text = circsim::export_netlist(*sketch, circsim::extract_nets(*sketch));
        if (netlist_out.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(netlist_out, std::ios::binary);
            out << text;
            if (!out) {
                std::cerr << "cannot write " << netlist_out << "\n";
                return kExitError;
            }
        }
        return kExitOk;
    }

    const auto result = circsim::simulate(*sketch);
    std::cout << circsim::write_report(result.report, json ? circsim::ReportFormat::Json : circsim::ReportFormat::Text);
    if (*check) {
        if (result.report.error || !result.report.diagnostics.empty()) return kExitError;
        return result.report.smoke.empty() ? kExitOk : kExitSmoke;
    }
    return kExitOk;
}
