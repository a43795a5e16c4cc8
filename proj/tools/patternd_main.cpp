// patternd: the PFP/1 command server.
#include <CLI11.hpp>
#include <iostream>

#include "patternd/server.hpp"

int main(int argc, char** argv) {
    CLI::App app{"patternd command server"};
    std::int64_t port = 7465;
    std::int64_t workers = 4;
    std::int64_t queue_cap = 64;
    std::string family = "text";
    std::int64_t max_conns = 128;
    std::string log_path;
    app.add_option("--port", port, "TCP port (0 picks one)")->capture_default_str();
    app.add_option("--workers", workers, "worker threads")->capture_default_str();
    app.add_option("--queue-cap", queue_cap, "task queue capacity")->capture_default_str();
    app.add_option("--family", family, "protocol family: text or json")->capture_default_str();
    app.add_option("--max-conns", max_conns, "connection cap")->capture_default_str();
    app.add_option("--log", log_path, "append log records to this file");
    CLI11_PARSE(app, argc, argv);

    patternd::ConfigBuilder builder;
    builder.port(port).workers(workers).queue_cap(queue_cap).family(family).max_conns(max_conns);
    if (app.count("--log")) builder.log_path(log_path);

    try {
        auto config = patternd::build_config(builder);
        // before any thread exists, so workers inherit the mask
        patternd::block_shutdown_signals();
        patternd::Server server(config);
        std::cout << "patternd listening on port " << server.port() << " (" << config.family << ")" << std::endl;
        server.run(true);
    } catch (const patternd::ConfigError& e) {
        std::cerr << "patternd: invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "patternd: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
