class Helpers { int x; }
