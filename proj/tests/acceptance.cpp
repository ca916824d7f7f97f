#include "escbundle/escbundle.hpp"
int main() { return 0; }
