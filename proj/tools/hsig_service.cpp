// HTTP verification service. HSIG_ADDR sets the listen address
// (default 127.0.0.1:8080), HSIG_STORE the profile directory (default ./profiles).

#include <cstdlib>
#include <iostream>

#include <httplib.h>

#include "hsig/service.hpp"

int main() {
    const char* addr_env = std::getenv("HSIG_ADDR");
    const char* store_env = std::getenv("HSIG_STORE");
    hsig::ListenAddress addr;
    try {
        addr = hsig::parse_listen_address(addr_env ? addr_env : "");
    } catch (const hsig::Error& e) {
        std::cerr << "hsig-service: " << e.what() << "\n";
        return 2;
    }

    hsig::DirectoryProfileStore store(store_env ? store_env : "profiles");
    hsig::Service service(store);
    httplib::Server server;
    service.mount(server);

    std::cerr << "hsig-service: listening on " << addr.host << ":" << addr.port << ", store "
              << store.root().string() << "\n";
    if (!server.listen(addr.host, addr.port)) {
        std::cerr << "hsig-service: cannot listen on " << addr.host << ":" << addr.port << "\n";
        return 2;
    }
    return 0;
}
