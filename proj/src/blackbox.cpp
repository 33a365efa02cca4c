#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>

#include "sade/benchmarks.hpp"

extern char** environ;

namespace sade {

namespace {

using Clock = std::chrono::steady_clock;

struct Worker {
    std::size_t index = 0;
    pid_t pid = -1;
    int out_fd = -1;
    std::string buffer;
    Clock::time_point deadline;
};

void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
}

void reap(Worker& w, bool kill_first) {
    if (w.pid > 0) {
        if (kill_first) ::kill(-w.pid, SIGKILL);  // whole group, so grandchildren go too
        int status = 0;
        while (::waitpid(w.pid, &status, 0) < 0 && errno == EINTR) {
        }
        w.pid = -1;
    }
    close_fd(w.out_fd);
}

void write_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const auto n = ::write(fd, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            return;  // child closed its input early; its reply decides the outcome
        }
        off += static_cast<std::size_t>(n);
    }
}

Worker launch(const BlackBoxSpec& spec, std::size_t index, const Vector& x) {
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw BlackBoxError(BlackBoxError::Kind::spawn, index, "pipe failed");
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw BlackBoxError(BlackBoxError::Kind::spawn, index, "pipe failed");
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    std::vector<char*> argv;
    for (const auto& a : spec.command) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    Worker w;
    w.index = index;
    const int rc = ::posix_spawnp(&w.pid, argv[0], &actions, &attr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (rc != 0) {
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        throw BlackBoxError(BlackBoxError::Kind::spawn, index,
                            "cannot start '" + spec.command.front() + "': " + std::strerror(rc));
    }

    // SIGPIPE from a child that exits without reading must not kill the optimiser.
    struct sigaction ignore {};
    struct sigaction previous {};
    ignore.sa_handler = SIG_IGN;
    ::sigaction(SIGPIPE, &ignore, &previous);
    write_all(in_pipe[1], format_request(x));
    ::sigaction(SIGPIPE, &previous, nullptr);
    ::close(in_pipe[1]);

    w.out_fd = out_pipe[0];
    w.deadline = Clock::now() + spec.timeout;
    return w;
}

}  // namespace

BlackBoxError::BlackBoxError(Kind kind, std::size_t index, const std::string& what)
    : std::runtime_error("evaluation " + std::to_string(index) + ": " + what), kind_(kind), index_(index) {}

void BlackBoxSpec::validate() const {
    if (command.empty()) throw std::invalid_argument("black-box: empty command");
    if (dim == 0) throw std::invalid_argument("black-box: dimension must be positive");
    if (parallel_workers < 1) throw std::invalid_argument("black-box: need at least one worker");
}

std::string format_request(std::span<const double> x) {
    std::string line;
    char buf[32];
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) line.push_back(' ');
        const int n = std::snprintf(buf, sizeof buf, "%.17g", x[i]);
        line.append(buf, static_cast<std::size_t>(n));
    }
    line.push_back('\n');
    return line;
}

double parse_response(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (line.empty() || ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(value))
        throw std::invalid_argument("non-numeric reply '" + std::string(line) + "'");
    return value;
}

std::vector<double> blackbox_evaluate(const BlackBoxSpec& spec, std::span<const Vector> batch) {
    spec.validate();
    for (std::size_t i = 0; i < batch.size(); ++i)
        if (batch[i].size() != spec.dim)
            throw std::invalid_argument("black-box: vector " + std::to_string(i) + " has wrong dimension");

    std::vector<double> results(batch.size());
    std::deque<Worker> running;
    std::size_t next = 0;

    auto abort_all = [&] {
        for (auto& w : running) reap(w, true);
        running.clear();
    };

    try {
        while (next < batch.size() || !running.empty()) {
            while (next < batch.size() && running.size() < spec.parallel_workers) {
                running.push_back(launch(spec, next, batch[next]));
                ++next;
            }

            std::vector<pollfd> fds;
            auto nearest = running.front().deadline;
            for (const auto& w : running) {
                fds.push_back({w.out_fd, POLLIN, 0});
                nearest = std::min(nearest, w.deadline);
            }
            const auto wait =
                std::chrono::duration_cast<std::chrono::milliseconds>(nearest - Clock::now()).count();
            const int rc = ::poll(fds.data(), fds.size(), static_cast<int>(std::max<long long>(wait, 0)));
            if (rc < 0 && errno != EINTR) throw BlackBoxError(BlackBoxError::Kind::spawn, 0, "poll failed");

            const auto now = Clock::now();
            std::deque<Worker> still;
            for (std::size_t k = 0; k < running.size(); ++k) {
                auto& w = running[k];
                bool finished = false;
                if (fds[k].revents & (POLLIN | POLLHUP | POLLERR)) {
                    char buf[4096];
                    const auto n = ::read(w.out_fd, buf, sizeof buf);
                    if (n > 0) w.buffer.append(buf, static_cast<std::size_t>(n));
                    const auto nl = w.buffer.find('\n');
                    if (nl != std::string::npos || n == 0) {
                        const std::string line = nl == std::string::npos ? w.buffer : w.buffer.substr(0, nl);
                        const std::size_t index = w.index;
                        reap(w, true);
                        try {
                            results[index] = parse_response(line);
                        } catch (const std::invalid_argument& e) {
                            throw BlackBoxError(BlackBoxError::Kind::protocol, index, e.what());
                        }
                        finished = true;
                    }
                }
                if (!finished && now >= w.deadline) {
                    const std::size_t index = w.index;
                    reap(w, true);
                    throw BlackBoxError(BlackBoxError::Kind::timeout, index,
                                        "no reply within " + std::to_string(spec.timeout.count()) + " ms");
                }
                if (!finished) still.push_back(std::move(w));
            }
            running = std::move(still);
        }
    } catch (...) {
        abort_all();
        throw;
    }
    return results;
}

}  // namespace sade
