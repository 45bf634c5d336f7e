#include <iostream>

int main() {
    std::cout << "nullfrenet CLI placeholder\n";
    return 0;
}
