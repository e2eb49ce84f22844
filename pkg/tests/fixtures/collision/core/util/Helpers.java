class Helpers {}
