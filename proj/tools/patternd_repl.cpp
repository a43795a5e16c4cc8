// patternd-repl: line client for a patternd server.
#include <CLI11.hpp>
#include <iostream>

#include "patternd/client.hpp"

int main(int argc, char** argv) {
    CLI::App app{"patternd REPL client"};
    patternd::ClientConfig cfg;
    std::string script;
    app.add_option("--host", cfg.host, "server host")->capture_default_str();
    app.add_option("--port", cfg.port, "server port")->capture_default_str();
    app.add_option("--script", script, "send the lines of this file, stop at the first ERR");
    app.add_option("--timeout-ms", cfg.timeout_ms, "per-reply timeout")->capture_default_str()->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    if (app.count("--script")) cfg.script = script;
    return patternd::repl(cfg, std::cin, std::cout, std::cerr);
}
