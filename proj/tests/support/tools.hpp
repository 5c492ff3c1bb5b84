#pragma once

// Synthetic competitor tools used by the runner and acceptance tests. Each
// writer drops an executable POSIX shell script honoring the adapter
// contract: <script> network spec timeout result_file.

#include <filesystem>
#include <fstream>
#include <string>
#include <sys/stat.h>

namespace support {

inline std::string write_script(const std::filesystem::path& path,
                                const std::string& body) {
    {
        std::ofstream out(path);
        out << "#!/bin/sh\n" << body;
    }
    ::chmod(path.c_str(), 0755);
    return path.string();
}

// Sleeps `startup` seconds (the simulated tool startup overhead), then works
// for the duration announced in the spec file's "; work <t>" header line,
// then answers unsat.
inline std::string make_sleep_work_tool(const std::filesystem::path& dir,
                                        double startup) {
    std::string body =
        "sleep " + std::to_string(startup) + "\n"
        "T=$(sed -n 's/^; work //p' \"$2\" | head -n 1)\n"
        "[ -z \"$T\" ] && T=0\n"
        "sleep \"$T\"\n"
        "echo unsat > \"$4\"\n";
    return write_script(dir / "sleep_work.sh", body);
}

// Never terminates; records its own pid and a background child's pid into
// $PIDFILE_DIR so the test can assert the whole tree was killed.
inline std::string make_hang_tool(const std::filesystem::path& dir) {
    std::string body =
        "echo $$ > \"$PIDFILE_DIR/main.pid\"\n"
        "sleep 100000 &\n"
        "echo $! > \"$PIDFILE_DIR/child.pid\"\n"
        "wait\n";
    return write_script(dir / "hang.sh", body);
}

// Fails if any state survived from a previous instance run (fresh-process /
// fresh-scratch isolation canary).
inline std::string make_canary_tool(const std::filesystem::path& dir) {
    std::string body =
        "M=\"$VNN_ARENA_WORKDIR/canary.marker\"\n"
        "if [ -e \"$M\" ]; then echo error > \"$4\"; else echo unsat > \"$4\"; fi\n"
        "touch \"$M\"\n";
    return write_script(dir / "canary.sh", body);
}

inline std::string make_garbage_tool(const std::filesystem::path& dir) {
    return write_script(dir / "garbage.sh",
                        "printf 'lorem ipsum dolor %s' \"$1\" > \"$4\"\n");
}

// Answers a fixed status; for sat, emits the given witness lines.
inline std::string make_const_tool(const std::filesystem::path& dir,
                                   const std::string& name,
                                   const std::string& answer,
                                   const std::string& witness = "") {
    std::string body = "{\n  echo " + answer + "\n";
    if (!witness.empty()) body += "  printf '%s\\n' '" + witness + "'\n";
    body += "} > \"$4\"\n";
    return write_script(dir / (name + ".sh"), body);
}

}  // namespace support
