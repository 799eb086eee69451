// Command-line front end: run declarative job files against the library.
//
//   rigidcoh --job <file> [--seed <int>] [--truncation-sweep d1,d2,...]
//            [--format table|machine] [--quiet]
//
// Environment: RIGIDCOH_PRECISION sets the default p-adic precision.
// Exit codes: 0 pass, 1 check failed, 2 input error, 3 not stabilized.

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include "rigid/jobfile.hpp"

namespace {

void usage(std::ostream& os) {
    os << "usage: rigidcoh --job <file> [--seed <int>]\n"
          "                [--truncation-sweep d1,d2,...]\n"
          "                [--format table|machine] [--quiet]\n";
}

}  // namespace

int main(int argc, char** argv) {
    std::string job_path;
    rigid::JobOptions opt;
    if (const char* p = std::getenv("RIGIDCOH_PRECISION")) {
        try {
            opt.default_precision = std::stoi(p);
        } catch (...) {
            std::cerr << "error: RIGIDCOH_PRECISION is not an integer\n";
            return 2;
        }
    }
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        auto next = [&]() -> const char* {
            if (i + 1 >= argc) {
                std::cerr << "error: " << a << " needs an argument\n";
                std::exit(2);
            }
            return argv[++i];
        };
        if (a == "--job") {
            job_path = next();
        } else if (a == "--seed") {
            try {
                opt.seed = std::stol(next());
            } catch (...) {
                std::cerr << "error: --seed must be an integer\n";
                return 2;
            }
        } else if (a == "--truncation-sweep") {
            std::string list = next();
            size_t pos = 0;
            while (pos < list.size()) {
                size_t comma = list.find(',', pos);
                if (comma == std::string::npos) comma = list.size();
                try {
                    opt.sweep.push_back(std::stoi(list.substr(pos, comma - pos)));
                } catch (...) {
                    std::cerr << "error: bad --truncation-sweep entry\n";
                    return 2;
                }
                pos = comma + 1;
            }
        } else if (a == "--format") {
            std::string f = next();
            if (f == "machine")
                opt.machine = true;
            else if (f == "table")
                opt.machine = false;
            else {
                std::cerr << "error: --format must be table or machine\n";
                return 2;
            }
        } else if (a == "--quiet") {
            opt.quiet = true;
        } else if (a == "--help" || a == "-h") {
            usage(std::cout);
            return 0;
        } else {
            std::cerr << "error: unknown flag " << a << "\n";
            usage(std::cerr);
            return 2;
        }
    }
    if (job_path.empty()) {
        usage(std::cerr);
        return 2;
    }

    auto outcome = rigid::run_job_file(job_path, opt);
    if (!outcome.output_path.empty()) {
        std::ofstream out(outcome.output_path);
        if (!out) {
            std::cerr << "error: cannot write report to " << outcome.output_path
                      << "\n";
            return 2;
        }
        out << outcome.report;
    }
    if (!opt.quiet) std::cout << outcome.report;
    return outcome.status;
}
